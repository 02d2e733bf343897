"""Export job: dataset JSONL in, sentence-embedding JSONL out.

The two file formats are the contract with the classifier toolkit; this
package shares no code with it.  Output files are written atomically
(temp file in the destination directory, then rename).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .encoders import ENCODER_DIMS, SentenceEncoder, resolve_encoder

DATASET_FIELDS = ("dialogue_id", "turn_index", "speaker", "text", "tag", "raw_tag")


class ExportError(ValueError):
    pass


@dataclass(frozen=True)
class ExportJob:
    dataset_path: str
    encoder: str  # "use" | "bert-base"
    output_path: str
    batch_size: int = 32
    model_path: str | None = None

    def __post_init__(self):
        if self.encoder not in ENCODER_DIMS:
            raise ExportError(f"unknown encoder {self.encoder!r}")
        if self.batch_size < 1:
            raise ExportError("batch_size must be >= 1")


class ExportResult(NamedTuple):
    n_vectors: int
    n_truncated: int


def read_dataset_keys(path) -> list[tuple[str, int, str]]:
    """(dialogue_id, turn_index, text) per utterance, file order."""
    rows: list[tuple[str, int, str]] = []
    seen: set[tuple[str, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ExportError(f"{path}:{line_no}: invalid JSON: {e.msg}") from None
            for fld in DATASET_FIELDS:
                if fld not in obj:
                    raise ExportError(f"{path}:{line_no}: missing field {fld!r}")
            key = (obj["dialogue_id"], int(obj["turn_index"]))
            if key in seen:
                raise ExportError(f"{path}:{line_no}: duplicate key {key!r}")
            seen.add(key)
            rows.append((key[0], key[1], obj["text"]))
    return rows


def export_embeddings(job: ExportJob,
                      encoder: SentenceEncoder | None = None) -> ExportResult:
    """One vector per utterance key, written with a dim/encoder header.

    ``encoder`` may be injected (tests, custom models); by default the
    pretrained encoder named by the job is loaded.
    """
    if encoder is None:
        encoder = resolve_encoder(job.encoder, job.model_path)
    expected_dim = ENCODER_DIMS[job.encoder]
    if encoder.dim != expected_dim:
        raise ExportError(
            f"encoder {job.encoder!r} must produce dim {expected_dim}, "
            f"got {encoder.dim}"
        )
    rows = read_dataset_keys(job.dataset_path)

    out_dir = os.path.dirname(os.path.abspath(job.output_path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"dim": expected_dim, "encoder": job.encoder}) + "\n")
            for start in range(0, len(rows), job.batch_size):
                batch = rows[start:start + job.batch_size]
                vectors = encoder.encode([text for _, _, text in batch])
                if vectors.shape != (len(batch), expected_dim):
                    raise ExportError(
                        f"encoder returned shape {vectors.shape}, expected "
                        f"({len(batch)}, {expected_dim})"
                    )
                for (did, ti, _), vec in zip(batch, vectors):
                    fh.write(json.dumps({
                        "dialogue_id": did,
                        "turn_index": ti,
                        "vector": [float(x) for x in vec],
                    }) + "\n")
        os.replace(tmp_path, job.output_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    return ExportResult(len(rows), encoder.truncated)


def verify_export(dataset_path, embedding_path) -> list[tuple[str, int]]:
    """Keys in the dataset missing from the export, dataset order.

    Raises :class:`ExportError` when a row's width contradicts the header.
    """
    header_dim = None
    present: set[tuple[str, int]] = set()
    with open(embedding_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if line_no == 1 and "dim" in obj and "dialogue_id" not in obj:
                header_dim = int(obj["dim"])
                continue
            key = (obj["dialogue_id"], int(obj["turn_index"]))
            if header_dim is not None and len(obj["vector"]) != header_dim:
                raise ExportError(
                    f"{embedding_path}:{line_no}: vector width "
                    f"{len(obj['vector'])} != header dim {header_dim}"
                )
            present.add(key)
    return [
        (did, ti)
        for did, ti, _ in read_dataset_keys(dataset_path)
        if (did, ti) not in present
    ]
