"""Checkpoint files: one structured text (JSON) document per trained model.

Layout (format version 1)::

    {
      "format_version": 1,
      "config": {"kind": "...", "input_dim": ..., ...},
      "parameters": {"<name>": {"shape": [...], "data": [row-major values]}},
      "history": [[train_acc, val_acc_or_null, mean_loss], ...]
    }

Values are written with Python's shortest round-trip float representation,
so a load reproduces the trained parameters bit-exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .models import ArchitectureKind, Model, ModelConfig, build_model
from .training import EpochStats, TrainedModel

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def _config_to_dict(config: ModelConfig) -> dict:
    return {
        "kind": config.kind.value,
        "input_dim": config.input_dim,
        "hidden_dim": config.hidden_dim,
        "n_classes": config.n_classes,
        "max_len": config.max_len,
        "context_window": config.context_window,
        "seed": config.seed,
        "dense_dims": list(config.dense_dims) if config.dense_dims else None,
        "dtype": config.dtype,
    }


def _config_from_dict(obj: dict) -> ModelConfig:
    try:
        kind = ArchitectureKind(obj["kind"])
        return ModelConfig(
            kind=kind,
            input_dim=obj["input_dim"],
            hidden_dim=obj["hidden_dim"],
            n_classes=obj["n_classes"],
            max_len=obj["max_len"],
            context_window=obj["context_window"],
            seed=obj["seed"],
            dense_dims=tuple(obj["dense_dims"]) if obj.get("dense_dims") else None,
            dtype=obj.get("dtype", "float64"),
        )
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"invalid checkpoint config: {e}") from None


def save_checkpoint(tm: TrainedModel, path) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "config": _config_to_dict(tm.config),
        "parameters": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in tm.parameters.items()
        },
        "history": [
            [h.train_acc, h.val_acc, h.mean_loss] for h in tm.history
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_checkpoint(path) -> TrainedModel:
    """Rebuild a TrainedModel; shape or version problems raise CheckpointError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"corrupted checkpoint: {e.msg}") from None
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CheckpointError("corrupted checkpoint: missing format_version")
    if payload["format_version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format version {payload['format_version']!r}"
        )
    config = _config_from_dict(payload["config"])

    # the architecture fixes the expected parameter inventory
    reference = build_model(config)
    expected = {name: arr.shape for name, arr in reference.params.items()}
    stored = payload.get("parameters", {})
    if set(stored) != set(expected):
        raise CheckpointError(
            f"parameter inventory mismatch: expected {sorted(expected)}, "
            f"got {sorted(stored)}"
        )
    params: dict[str, np.ndarray] = {}
    for name in reference.params:  # keep canonical ordering
        entry = stored[name]
        shape = tuple(entry["shape"])
        if shape != expected[name]:
            raise CheckpointError(
                f"shape mismatch for {name!r}: expected {expected[name]}, got {shape}"
            )
        arr = np.asarray(entry["data"], dtype=config.dtype).reshape(shape)
        params[name] = arr
    history = tuple(
        EpochStats(row[0], row[1], row[2]) for row in payload.get("history", [])
    )
    return TrainedModel(Model(config, params), history)
