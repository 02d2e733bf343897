import json
from pathlib import Path

import numpy as np
import pytest

from dialact.corpus import Dataset, Utterance, tokenize
from dialact.representation import SentenceEmbeddingStore
from dialact.tags import default_tagset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def tagset():
    return default_tagset()


def build_dataset(rows, name="toy", mode="speech"):
    """rows: (dialogue_id, speaker, text, tag_label_or_None) in dataset order."""
    ts = default_tagset()
    utterances = []
    counters: dict[str, int] = {}
    for dialogue_id, speaker, text, tag_label in rows:
        idx = counters.get(dialogue_id, 0)
        counters[dialogue_id] = idx + 1
        utterances.append(
            Utterance(
                dialogue_id=dialogue_id,
                turn_index=idx,
                speaker=speaker,
                text=text,
                tokens=tuple(tokenize(text, mode)),
                tag=ts.by_label(tag_label) if tag_label else None,
                raw_tag=tag_label,
            )
        )
    return Dataset(name, mode, tuple(utterances), ts)


@pytest.fixture
def make_dataset():
    return build_dataset


# ---------------------------------------------------------------------------
# Separable 50-utterance, 5-tag toy problem
# ---------------------------------------------------------------------------

TOY_TAGS = ("sd", "b", "sv", "aa", "qy")


def separable_toy_dataset(n_per_tag=10, seed=123):
    """Each tag owns a private vocabulary, so any architecture can memorize."""
    rng = np.random.default_rng(seed)
    rows = []
    for k, tag in enumerate(TOY_TAGS):
        vocab = [f"t{k}w{j}" for j in range(5)]
        for i in range(n_per_tag):
            n_words = int(rng.integers(3, 6))
            words = [vocab[int(rng.integers(len(vocab)))] for _ in range(n_words)]
            dialogue = f"dlg{(k * n_per_tag + i) % 5}"
            rows.append((dialogue, "A", " ".join(words), tag))
    rows.sort(key=lambda r: r[0])  # keep dialogues contiguous
    return build_dataset(rows, name="separable-toy")


@pytest.fixture(scope="session")
def toy_dataset():
    return separable_toy_dataset()


def toy_word_table(dataset, dim=8, seed=5):
    from dialact.representation import WordEmbeddingTable

    rng = np.random.default_rng(seed)
    vocab = sorted({t for u in dataset.utterances for t in u.tokens})
    entries = {}
    for tok in vocab:
        v = rng.standard_normal(dim)
        entries[tok] = v / np.linalg.norm(v)
    return WordEmbeddingTable(dim, entries)


def toy_sentence_store(dataset, dim=16, seed=9, class_structured=True):
    """Unit vectors per utterance key; clustered by tag when structured."""
    rng = np.random.default_rng(seed)
    tag_ids = sorted({u.tag.id for u in dataset.utterances if u.tag})
    centers = {t: rng.standard_normal(dim) for t in tag_ids}
    for t in centers:
        centers[t] /= np.linalg.norm(centers[t])
    entries = {}
    for u in dataset.utterances:
        noise = rng.standard_normal(dim) * 0.1
        base = centers[u.tag.id] if (class_structured and u.tag) else np.zeros(dim)
        v = base + noise
        entries[(u.dialogue_id, u.turn_index)] = v / np.linalg.norm(v)
    return SentenceEmbeddingStore(dim, entries)


def write_glove_file(path, table):
    with open(path, "w", encoding="utf-8") as fh:
        for tok in sorted(table.entries):
            vals = " ".join(repr(float(x)) for x in table.entries[tok])
            fh.write(f"{tok} {vals}\n")


def write_sentence_store(path, store, encoder="fixture"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": store.dim, "encoder": encoder}) + "\n")
        for (did, ti) in sorted(store.entries):
            fh.write(json.dumps({
                "dialogue_id": did,
                "turn_index": ti,
                "vector": [float(x) for x in store.entries[(did, ti)]],
            }) + "\n")
