"""Pretrained sentence encoders behind one small interface.

``use`` loads the Universal Sentence Encoder from TensorFlow Hub (512-d);
``bert-base`` loads the uncased BERT base model via transformers and takes
the pooled sequence output (768-d).  Both are optional heavy dependencies:
anything missing raises :class:`EncoderUnavailable` with an actionable
message instead of an import error.
"""

from __future__ import annotations

import os
from typing import Protocol

import numpy as np

ENCODER_DIMS = {"use": 512, "bert-base": 768}

USE_HUB_HANDLE = "https://tfhub.dev/google/universal-sentence-encoder/4"
BERT_MODEL_NAME = "bert-base-uncased"
BERT_MAX_TOKENS = 512


class EncoderUnavailable(RuntimeError):
    pass


class SentenceEncoder(Protocol):
    """One vector per input text; ``truncated`` counts clipped inputs."""

    name: str
    dim: int

    def encode(self, texts: list[str]) -> np.ndarray: ...

    @property
    def truncated(self) -> int: ...


class UseEncoder:
    """Universal Sentence Encoder via tensorflow_hub."""

    name = "use"
    dim = ENCODER_DIMS["use"]

    def __init__(self, model_path: str | None = None):
        try:
            import tensorflow_hub as hub
        except ImportError as e:
            raise EncoderUnavailable(
                "tensorflow_hub is not installed; pip install 'embed-export[use]'"
            ) from e
        handle = model_path or os.environ.get("USE_MODEL_PATH") or USE_HUB_HANDLE
        try:
            self._model = hub.load(handle)
        except Exception as e:
            raise EncoderUnavailable(f"could not load USE model from {handle!r}: {e}") from e
        self._truncated = 0

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.asarray(self._model(texts)).astype(np.float64)
        if out.shape != (len(texts), self.dim):
            raise EncoderUnavailable(
                f"USE model returned shape {out.shape}, expected ({len(texts)}, {self.dim})"
            )
        return out

    @property
    def truncated(self) -> int:
        return self._truncated  # USE handles arbitrary-length input itself


class BertEncoder:
    """BERT-base pooled output via transformers."""

    name = "bert-base"
    dim = ENCODER_DIMS["bert-base"]

    def __init__(self, model_path: str | None = None):
        try:
            import torch  # noqa: F401
            from transformers import AutoModel, AutoTokenizer
        except ImportError as e:
            raise EncoderUnavailable(
                "torch/transformers are not installed; pip install 'embed-export[bert]'"
            ) from e
        source = model_path or os.environ.get("BERT_MODEL_PATH") or BERT_MODEL_NAME
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(source)
            self._model = AutoModel.from_pretrained(source)
        except Exception as e:
            raise EncoderUnavailable(
                f"could not load BERT weights from {source!r} (offline?): {e}"
            ) from e
        self._model.eval()
        self._truncated = 0

    def encode(self, texts: list[str]) -> np.ndarray:
        import torch

        for text in texts:
            if len(self._tokenizer.tokenize(text)) > BERT_MAX_TOKENS - 2:
                self._truncated += 1
        batch = self._tokenizer(
            texts, padding=True, truncation=True, max_length=BERT_MAX_TOKENS,
            return_tensors="pt",
        )
        with torch.no_grad():
            out = self._model(**batch)
        pooled = out.pooler_output.numpy().astype(np.float64)
        if pooled.shape != (len(texts), self.dim):
            raise EncoderUnavailable(
                f"BERT returned shape {pooled.shape}, expected ({len(texts)}, {self.dim})"
            )
        return pooled

    @property
    def truncated(self) -> int:
        return self._truncated


_LOADERS = {"use": UseEncoder, "bert-base": BertEncoder}


def resolve_encoder(name: str, model_path: str | None = None) -> SentenceEncoder:
    if name not in _LOADERS:
        raise EncoderUnavailable(
            f"unknown encoder {name!r}; choose one of {sorted(_LOADERS)}"
        )
    return _LOADERS[name](model_path)
