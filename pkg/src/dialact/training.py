"""Dataset encoding and the minibatch Adam training loop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import nn
from .corpus import Dataset
from .models import ArchitectureKind, Example, Model, ModelConfig, ModelError, TrainConfig
from .representation import (
    EncodedSequence,
    ProbMatrix,
    SentenceEmbeddingStore,
    WordEmbeddingTable,
    encode_prob,
    encode_words,
)


@dataclass(frozen=True)
class EncoderContext:
    """The representation inputs an architecture needs at encode time."""

    prob_matrix: ProbMatrix | None = None
    word_table: WordEmbeddingTable | None = None
    sentence_store: SentenceEmbeddingStore | None = None


class EpochStats(NamedTuple):
    train_acc: float
    val_acc: float | None
    mean_loss: float


def _context_windows(dataset: Dataset, store: SentenceEmbeddingStore,
                     window: int) -> list[EncodedSequence]:
    """Per-utterance window of the current and previous sentence vectors.

    Slots before the dialogue start are zero vectors flagged as padding.
    """
    out: list[EncodedSequence] = []
    for _, utts in dataset.dialogues():
        vecs = [store.vector((u.dialogue_id, u.turn_index)) for u in utts]
        for i, utt in enumerate(utts):
            vectors = np.zeros((window, store.dim), dtype=np.float64)
            mask = np.zeros(window, dtype=bool)
            for slot in range(window):
                j = i - (window - 1) + slot
                if j >= 0:
                    vectors[slot] = vecs[j]
                    mask[slot] = True
            label = utt.tag.id if utt.tag is not None else None
            out.append(EncodedSequence(vectors, mask, label))
    return out


def encode_dataset(dataset: Dataset, config: ModelConfig,
                   ctx: EncoderContext) -> list[Example]:
    """Encode every utterance for the given architecture, dataset order."""
    kind = config.kind
    if kind is ArchitectureKind.PROB_LSTM:
        if ctx.prob_matrix is None:
            raise ModelError("prob-lstm requires a probability matrix")
        return [
            Example(seq, seq.label)
            for seq in (encode_prob(u, ctx.prob_matrix, config.max_len)
                        for u in dataset.utterances)
        ]
    if kind is ArchitectureKind.GLOVE_LSTM:
        if ctx.word_table is None:
            raise ModelError("glove-lstm requires a word-embedding table")
        return [
            Example(seq, seq.label)
            for seq in (encode_words(u, ctx.word_table, config.max_len)
                        for u in dataset.utterances)
        ]
    if ctx.sentence_store is None:
        raise ModelError(f"{kind.value} requires a sentence-embedding store")
    if kind is ArchitectureKind.USE_CONV_LSTM:
        seqs = _context_windows(dataset, ctx.sentence_store, config.context_window)
        return [Example(seq, seq.label) for seq in seqs]
    return [
        Example(
            ctx.sentence_store.vector((u.dialogue_id, u.turn_index)),
            u.tag.id if u.tag is not None else None,
        )
        for u in dataset.utterances
    ]


def accuracy(model: Model, examples: list[Example]) -> float:
    if not examples:
        raise ModelError("accuracy of an empty example list is undefined")
    hits = 0
    for ex in examples:
        logits, _ = model.forward(ex.input)
        if int(np.argmax(logits)) == ex.label:
            hits += 1
    return hits / len(examples)


@dataclass(frozen=True)
class TrainedModel:
    model: Model
    history: tuple[EpochStats, ...]

    @property
    def config(self) -> ModelConfig:
        return self.model.config

    @property
    def parameters(self) -> dict[str, np.ndarray]:
        return self.model.params


def train(model: Model, train_examples: list[Example],
          val_examples: list[Example], tc: TrainConfig) -> TrainedModel:
    """Seeded, shuffled minibatch Adam training.

    Batch gradients are the mean of per-example gradients summed in batch
    order, so results are bit-deterministic given (seed, config, data).
    The per-epoch history records train/val accuracy (validation ``None``
    when no validation examples were given) and the mean running loss.
    """
    if not train_examples:
        raise ModelError("empty training set")
    for ex in train_examples + val_examples:
        if ex.label is None:
            raise ModelError("training requires fully labeled examples")

    rng = np.random.default_rng(tc.seed)
    params = dict(model.params)
    state = nn.AdamState(params)
    step = 0
    history: list[EpochStats] = []
    n = len(train_examples)
    for _ in range(tc.epochs):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, tc.batch_size):
            batch = [train_examples[i] for i in order[start:start + tc.batch_size]]
            grad_sum: dict[str, np.ndarray] = {
                k: np.zeros_like(v) for k, v in params.items()
            }
            for ex in batch:
                loss, grads = model.loss_and_grads(ex)
                total_loss += loss
                for k in grad_sum:
                    grad_sum[k] += grads[k]
            scale = 1.0 / len(batch)
            mean_grads = {k: g * scale for k, g in grad_sum.items()}
            step += 1
            params, state = nn.adam_step(params, mean_grads, state, step, tc)
            model.params = params
        train_acc = accuracy(model, train_examples)
        val_acc = accuracy(model, val_examples) if val_examples else None
        history.append(EpochStats(train_acc, val_acc, total_loss / n))
    return TrainedModel(model, tuple(history))
