"""Numeric utterance representations.

Three interchangeable sources of vectors feed the models: the
word-over-tags probability matrix learned from the training corpus, a
pretrained word-embedding table (GloVe text format), and precomputed
sentence embeddings keyed by ``(dialogue_id, turn_index)``.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .corpus import Dataset, ParseError, Utterance


class RepresentationError(ValueError):
    pass


@dataclass(frozen=True)
class EncodedSequence:
    """Model input: padded vector sequence with a validity mask.

    ``mask[t]`` is True for real steps and False for padding; ``vectors``
    and ``mask`` share their leading length.  ``label`` is a tag id when the
    utterance is labeled.
    """

    vectors: np.ndarray  # (max_len, dim), float64
    mask: np.ndarray     # (max_len,), bool
    label: int | None = None

    def __post_init__(self):
        if self.vectors.shape[0] != self.mask.shape[0]:
            raise RepresentationError("vectors and mask lengths differ")


class ProbMatrix:
    """Keyword-over-tags probability table.

    Row ``i`` is the empirical distribution of act tags observed for
    keyword ``i`` in the training corpus; the corpus-level tag distribution
    (``prior``) stands in for out-of-vocabulary tokens so every encoded row
    stays a probability distribution.
    """

    def __init__(self, keywords, probs: np.ndarray, prior: np.ndarray, min_freq: int):
        self.keywords = tuple(keywords)
        self.probs = np.asarray(probs, dtype=np.float64)
        self.prior = np.asarray(prior, dtype=np.float64)
        self.min_freq = int(min_freq)
        self.m = self.probs.shape[1] if self.probs.size else self.prior.shape[0]
        self._index = {kw: i for i, kw in enumerate(self.keywords)}
        if self.probs.shape[0] != len(self.keywords):
            raise RepresentationError("probs row count != keyword count")
        self.probs.setflags(write=False)
        self.prior.setflags(write=False)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def row(self, token: str) -> np.ndarray:
        """Distribution for ``token``; the corpus prior when OOV."""
        i = self._index.get(token)
        return self.prior if i is None else self.probs[i]


def build_prob_matrix(train: Dataset, min_freq: int = 5) -> ProbMatrix:
    """Count token/tag co-occurrences into a row-stochastic matrix.

    Keywords are the tokens whose total occurrence count reaches
    ``min_freq``; entry (i, j) is count(token i in utterances tagged j)
    divided by count(token i).
    """
    if min_freq < 1:
        raise RepresentationError("min_freq must be >= 1")
    if len(train) == 0:
        raise RepresentationError("empty training set")
    m = len(train.tagset)
    token_freq: Counter[str] = Counter()
    token_tag: dict[str, np.ndarray] = defaultdict(lambda: np.zeros(m))
    tag_counts = np.zeros(m, dtype=np.float64)
    for utt in train.utterances:
        if utt.tag is None:
            raise RepresentationError(
                f"unlabeled utterance ({utt.dialogue_id!r}, {utt.turn_index})"
            )
        tag_counts[utt.tag.id] += 1
        for tok in utt.tokens:
            token_freq[tok] += 1
            token_tag[tok][utt.tag.id] += 1

    keywords = sorted(t for t, c in token_freq.items() if c >= min_freq)
    probs = np.zeros((len(keywords), m), dtype=np.float64)
    for i, kw in enumerate(keywords):
        probs[i] = token_tag[kw] / token_freq[kw]
    prior = tag_counts / tag_counts.sum()
    return ProbMatrix(keywords, probs, prior, min_freq)


def save_prob_matrix(pm: ProbMatrix, path) -> None:
    payload = {
        "min_freq": pm.min_freq,
        "m": pm.m,
        "prior": pm.prior.tolist(),
        "keywords": list(pm.keywords),
        "probs": pm.probs.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)


def load_prob_matrix(path) -> ProbMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    probs = np.asarray(payload["probs"], dtype=np.float64)
    if probs.size == 0:
        probs = probs.reshape(0, payload["m"])
    return ProbMatrix(
        payload["keywords"],
        probs,
        np.asarray(payload["prior"], dtype=np.float64),
        payload["min_freq"],
    )


def _pad_rows(rows: list[np.ndarray], max_len: int, dim: int) -> EncodedSequence:
    vectors = np.zeros((max_len, dim), dtype=np.float64)
    mask = np.zeros(max_len, dtype=bool)
    for t, row in enumerate(rows[:max_len]):
        vectors[t] = row
        mask[t] = True
    return EncodedSequence(vectors=vectors, mask=mask)


def encode_prob(utterance: Utterance, pm: ProbMatrix, max_len: int) -> EncodedSequence:
    """Tag-distribution rows per token, prior for OOV, padded to max_len."""
    if max_len < 1:
        raise RepresentationError("max_len must be >= 1")
    rows = [pm.row(tok) for tok in utterance.tokens]
    seq = _pad_rows(rows, max_len, pm.m)
    label = utterance.tag.id if utterance.tag is not None else None
    return EncodedSequence(seq.vectors, seq.mask, label)


class WordEmbeddingTable:
    """token -> fixed-width vector lookup (GloVe-style)."""

    def __init__(self, dim: int, entries: dict[str, np.ndarray], n_duplicates: int = 0):
        self.dim = dim
        self.entries = entries
        self.n_duplicates = n_duplicates  # duplicate lines seen at load (last wins)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def vector(self, token: str) -> np.ndarray:
        """Stored vector, or a zero vector for OOV tokens."""
        v = self.entries.get(token)
        return np.zeros(self.dim) if v is None else v


def load_word_embeddings(path) -> WordEmbeddingTable:
    """Parse whitespace-separated ``token v1 ... vd`` lines (no header)."""
    entries: dict[str, np.ndarray] = {}
    dim = None
    duplicates = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise ParseError(line_no, "no vector values")
                dim = len(values)
            elif len(values) != dim:
                raise ParseError(
                    line_no, f"expected {dim} values, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise ParseError(line_no, "non-numeric embedding value") from None
            if token in entries:
                duplicates += 1
            vec.setflags(write=False)
            entries[token] = vec
    if dim is None:
        raise RepresentationError("empty embedding file")
    return WordEmbeddingTable(dim, entries, duplicates)


def encode_words(
    utterance: Utterance, table: WordEmbeddingTable, max_len: int
) -> EncodedSequence:
    """Embedding row per token, zero vector for OOV, padded to max_len."""
    if max_len < 1:
        raise RepresentationError("max_len must be >= 1")
    rows = [table.vector(tok) for tok in utterance.tokens]
    seq = _pad_rows(rows, max_len, table.dim)
    label = utterance.tag.id if utterance.tag is not None else None
    return EncodedSequence(seq.vectors, seq.mask, label)


class SentenceEmbeddingStore:
    """(dialogue_id, turn_index) -> sentence vector."""

    def __init__(self, dim: int, entries: dict[tuple[str, int], np.ndarray],
                 encoder: str | None = None):
        self.dim = dim
        self.entries = entries
        self.encoder = encoder

    def __contains__(self, key: tuple[str, int]) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def vector(self, key: tuple[str, int]) -> np.ndarray:
        try:
            return self.entries[key]
        except KeyError:
            raise RepresentationError(f"no sentence vector for key {key!r}") from None


def load_sentence_embeddings(path) -> SentenceEmbeddingStore:
    """Load the JSON Lines sentence-embedding format.

    An optional first-line header object ``{"dim": D, "encoder": name}`` is
    validated against the row widths.  Duplicate keys and ragged dimensions
    are errors.
    """
    entries: dict[tuple[str, int], np.ndarray] = {}
    dim = None
    encoder = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(line_no, f"invalid JSON: {e.msg}") from None
            if line_no == 1 and "dim" in obj and "dialogue_id" not in obj:
                dim = int(obj["dim"])
                encoder = obj.get("encoder")
                continue
            for fld in ("dialogue_id", "turn_index", "vector"):
                if fld not in obj:
                    raise ParseError(line_no, f"missing required field {fld!r}")
            key = (obj["dialogue_id"], int(obj["turn_index"]))
            if key in entries:
                raise ParseError(line_no, f"duplicate key {key!r}")
            vec = np.asarray(obj["vector"], dtype=np.float64)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise ParseError(
                    line_no, f"dimension mismatch: expected {dim}, got {vec.shape[0]}"
                )
            vec.setflags(write=False)
            entries[key] = vec
    if dim is None:
        raise RepresentationError("empty sentence-embedding file")
    return SentenceEmbeddingStore(dim, entries, encoder)


def coverage_check(store: SentenceEmbeddingStore, dataset: Dataset) -> list[tuple[str, int]]:
    """Keys present in the dataset but missing from the store, dataset order."""
    return [
        (u.dialogue_id, u.turn_index)
        for u in dataset.utterances
        if (u.dialogue_id, u.turn_index) not in store
    ]
