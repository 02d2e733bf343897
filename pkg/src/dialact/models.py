"""The five classifier architectures and their training-facing surface.

All five share the same softmax cross-entropy head over the 42 tag
classes; they differ in what they consume:

* ``prob-lstm``   -- keyword/tag probability rows -> LSTM -> dense
* ``glove-lstm``  -- word-embedding rows -> LSTM -> dense
* ``use``         -- one sentence vector -> three dense layers
* ``use-lstm``    -- a window of sentence vectors -> conv1d -> LSTM -> dense
* ``bert-head``   -- one sentence vector -> a single dense layer
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import nn
from .representation import EncodedSequence
from .tags import DaTag, default_tagset

N_CLASSES = 42
CONV_WIDTH = 3  # kernel width of the use-lstm convolution


class ModelError(ValueError):
    pass


class ArchitectureKind(Enum):
    PROB_LSTM = "prob-lstm"
    GLOVE_LSTM = "glove-lstm"
    USE_DENSE = "use"
    USE_CONV_LSTM = "use-lstm"
    BERT_HEAD = "bert-head"

    @property
    def sequence_input(self) -> bool:
        return self in (
            ArchitectureKind.PROB_LSTM,
            ArchitectureKind.GLOVE_LSTM,
            ArchitectureKind.USE_CONV_LSTM,
        )

    @property
    def uses_sentence_store(self) -> bool:
        return self in (
            ArchitectureKind.USE_DENSE,
            ArchitectureKind.USE_CONV_LSTM,
            ArchitectureKind.BERT_HEAD,
        )


@dataclass(frozen=True)
class ModelConfig:
    kind: ArchitectureKind
    input_dim: int
    hidden_dim: int = 128
    n_classes: int = N_CLASSES
    max_len: int = 128
    context_window: int = 3
    seed: int = 0
    dense_dims: tuple[int, ...] | None = None  # UseDense only, three layers
    dtype: str = "float64"  # float32 allowed for speed, float64 for tests

    def __post_init__(self):
        if self.input_dim < 1 or self.hidden_dim < 1 or self.max_len < 1:
            raise ModelError("dims must be positive")
        if self.n_classes != len(default_tagset()):
            raise ModelError(
                f"n_classes must equal the tagset size ({len(default_tagset())})"
            )
        if self.kind is ArchitectureKind.USE_CONV_LSTM and self.context_window < 1:
            raise ModelError("context_window must be >= 1")
        if self.kind is ArchitectureKind.USE_DENSE:
            dims = self.dense_dims
            if dims is None or len(dims) != 3:
                raise ModelError("use architecture requires exactly three dense_dims")
            if dims[-1] != self.n_classes:
                raise ModelError("last dense dim must equal n_classes")
            if any(d < 1 for d in dims):
                raise ModelError("dense_dims must be positive")
        if self.dtype not in ("float64", "float32"):
            raise ModelError(f"unsupported dtype {self.dtype!r}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 64
    epochs: int = 10
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 42

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ModelError("learning_rate must be > 0")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ModelError("Adam betas must lie in (0, 1)")
        if self.batch_size < 1:
            raise ModelError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ModelError("epochs must be >= 0")


class Example(NamedTuple):
    """One model input (EncodedSequence or raw vector) with optional label."""

    input: object
    label: int | None


class Model:
    """Architecture graph plus its named parameters.

    Single-owner while training (parameters are replaced wholesale by the
    optimizer); safe for concurrent read-only prediction afterwards.
    """

    def __init__(self, config: ModelConfig, params: dict[str, np.ndarray]):
        self.config = config
        self.params = params

    # -- forward -----------------------------------------------------------

    def _check_sequence(self, seq: EncodedSequence) -> None:
        if seq.vectors.shape[1] != self.config.input_dim:
            raise ModelError(
                f"input dim {seq.vectors.shape[1]} != config input_dim "
                f"{self.config.input_dim}"
            )

    def forward(self, example_input) -> tuple[np.ndarray, dict]:
        """Logits (n_classes,) and the cache needed for the backward pass."""
        p = self.params
        kind = self.config.kind
        dtype = np.dtype(self.config.dtype)
        if kind in (ArchitectureKind.PROB_LSTM, ArchitectureKind.GLOVE_LSTM):
            seq = example_input
            self._check_sequence(seq)
            x = seq.vectors.astype(dtype, copy=False)
            _, h, lstm_cache = nn.lstm_forward(
                x, seq.mask, p["lstm.Wx"], p["lstm.Wh"], p["lstm.b"]
            )
            logits, out_cache = nn.dense_forward(h, p["out.W"], p["out.b"], "none")
            return logits, {"lstm": lstm_cache, "out": out_cache}
        if kind is ArchitectureKind.USE_CONV_LSTM:
            seq = example_input
            self._check_sequence(seq)
            x = seq.vectors.astype(dtype, copy=False)
            conv_out, conv_cache = nn.conv1d_forward(x, p["conv.W"], p["conv.b"], "relu")
            _, h, lstm_cache = nn.lstm_forward(
                conv_out, seq.mask, p["lstm.Wx"], p["lstm.Wh"], p["lstm.b"]
            )
            logits, out_cache = nn.dense_forward(h, p["out.W"], p["out.b"], "none")
            return logits, {"conv": conv_cache, "lstm": lstm_cache, "out": out_cache}
        # vector-input architectures
        vec = np.asarray(example_input, dtype=dtype)
        if vec.ndim != 1 or vec.shape[0] != self.config.input_dim:
            raise ModelError(
                f"input shape {vec.shape} != (input_dim={self.config.input_dim},)"
            )
        if kind is ArchitectureKind.USE_DENSE:
            caches = []
            h = vec
            for i, act in enumerate(("relu", "relu", "none")):
                h, cache = nn.dense_forward(h, p[f"dense{i}.W"], p[f"dense{i}.b"], act)
                caches.append(cache)
            return h, {"dense": caches}
        if kind is ArchitectureKind.BERT_HEAD:
            logits, out_cache = nn.dense_forward(vec, p["out.W"], p["out.b"], "none")
            return logits, {"out": out_cache}
        raise ModelError(f"unknown architecture {kind!r}")

    # -- backward ----------------------------------------------------------

    def backward_from_logits(self, dlogits: np.ndarray, caches: dict) -> dict[str, np.ndarray]:
        """Analytic parameter gradients given a gradient on the logits."""
        kind = self.config.kind
        grads: dict[str, np.ndarray] = {}
        if kind is ArchitectureKind.USE_DENSE:
            dy = dlogits
            for i in (2, 1, 0):
                dy, dW, db = nn.dense_backward(dy, caches["dense"][i])
                grads[f"dense{i}.W"] = dW
                grads[f"dense{i}.b"] = db
            return grads
        if kind is ArchitectureKind.BERT_HEAD:
            _, dW, db = nn.dense_backward(dlogits, caches["out"])
            return {"out.W": dW, "out.b": db}
        dh, dW, db = nn.dense_backward(dlogits, caches["out"])
        grads["out.W"] = dW
        grads["out.b"] = db
        dx, dWx, dWh, dbl = nn.lstm_backward(dh, caches["lstm"])
        grads["lstm.Wx"] = dWx
        grads["lstm.Wh"] = dWh
        grads["lstm.b"] = dbl
        if kind is ArchitectureKind.USE_CONV_LSTM:
            _, dWc, dbc = nn.conv1d_backward(dx, caches["conv"])
            grads["conv.W"] = dWc
            grads["conv.b"] = dbc
        return grads

    def loss_and_grads(self, example: Example) -> tuple[float, dict[str, np.ndarray]]:
        if example.label is None:
            raise ModelError("cannot compute a loss for an unlabeled example")
        logits, caches = self.forward(example.input)
        loss, dlogits = nn.softmax_cross_entropy(logits, example.label)
        return loss, self.backward_from_logits(dlogits, caches)


def build_model(config: ModelConfig) -> Model:
    """Wire the architecture named by ``config`` with seeded Glorot init.

    Biases start at zero except the LSTM forget gate, which starts at 1.
    """
    rng = np.random.default_rng(config.seed)
    dtype = np.dtype(config.dtype)
    H, din, n_out = config.hidden_dim, config.input_dim, config.n_classes
    params: dict[str, np.ndarray] = {}

    def glorot(shape, fan_in, fan_out):
        return nn.glorot_uniform(rng, shape, fan_in, fan_out, dtype)

    def lstm_params(lstm_in: int):
        params["lstm.Wx"] = glorot((lstm_in, 4 * H), lstm_in, 4 * H)
        params["lstm.Wh"] = glorot((H, 4 * H), H, 4 * H)
        b = np.zeros(4 * H, dtype=dtype)
        b[H:2 * H] = 1.0  # forget gate bias
        params["lstm.b"] = b

    kind = config.kind
    if kind in (ArchitectureKind.PROB_LSTM, ArchitectureKind.GLOVE_LSTM):
        lstm_params(din)
        params["out.W"] = glorot((H, n_out), H, n_out)
        params["out.b"] = np.zeros(n_out, dtype=dtype)
    elif kind is ArchitectureKind.USE_CONV_LSTM:
        params["conv.W"] = glorot((CONV_WIDTH, din, H), CONV_WIDTH * din, H)
        params["conv.b"] = np.zeros(H, dtype=dtype)
        lstm_params(H)
        params["out.W"] = glorot((H, n_out), H, n_out)
        params["out.b"] = np.zeros(n_out, dtype=dtype)
    elif kind is ArchitectureKind.USE_DENSE:
        dims = (din,) + tuple(config.dense_dims)
        for i in range(3):
            params[f"dense{i}.W"] = glorot((dims[i], dims[i + 1]), dims[i], dims[i + 1])
            params[f"dense{i}.b"] = np.zeros(dims[i + 1], dtype=dtype)
    elif kind is ArchitectureKind.BERT_HEAD:
        params["out.W"] = glorot((din, n_out), din, n_out)
        params["out.b"] = np.zeros(n_out, dtype=dtype)
    else:
        raise ModelError(f"unknown architecture {kind!r}")
    return Model(config, params)


def predict(model: Model, example_input) -> tuple[np.ndarray, DaTag]:
    """Tag distribution and the argmax tag (ties -> lowest tag id)."""
    logits, _ = model.forward(example_input)
    dist = nn.softmax(logits)
    tag_id = int(np.argmax(dist))  # np.argmax returns the first maximum
    return dist, default_tagset().by_id(tag_id)


def _linear_probe_weights(n: int) -> np.ndarray:
    # fixed, nowhere-zero readout used to make the checked map linear
    return np.cos(np.arange(n) * 0.7) + 1.5


def grad_check(model: Model, example: Example, epsilon: float = 1e-5,
               loss: str = "ce") -> float:
    """Max relative error of analytic vs central-finite-difference gradients.

    ``loss="ce"`` checks the softmax cross-entropy training loss;
    ``loss="linear"`` checks a fixed linear readout of the logits, for which
    central differences are exact up to rounding.  Relative error is
    ``|a - n| / max(|a|, |n|, 1e-6)`` per coordinate.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ModelError("epsilon must lie in [1e-7, 1e-3]")

    if loss == "ce":
        if example.label is None:
            raise ModelError("ce grad check requires a labeled example")

        def loss_fn() -> float:
            logits, _ = model.forward(example.input)
            return nn.softmax_cross_entropy(logits, example.label)[0]

        analytic = model.loss_and_grads(example)[1]
    elif loss == "linear":
        w = _linear_probe_weights(model.config.n_classes)

        def loss_fn() -> float:
            logits, _ = model.forward(example.input)
            return float(w @ logits)

        logits, caches = model.forward(example.input)
        analytic = model.backward_from_logits(w, caches)
    else:
        raise ModelError(f"unknown grad-check loss {loss!r}")

    worst = 0.0
    for name, p in model.params.items():
        a = analytic[name]
        flat = p.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            up = loss_fn()
            flat[idx] = orig - epsilon
            down = loss_fn()
            flat[idx] = orig
            numeric = (up - down) / (2.0 * epsilon)
            a_val = float(a.reshape(-1)[idx])
            err = abs(a_val - numeric) / max(abs(a_val), abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst
