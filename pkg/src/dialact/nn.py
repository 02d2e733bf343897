"""From-scratch differentiable primitives on numpy arrays.

Every layer comes as a ``*_forward`` / ``*_backward`` pair where the
backward pass returns exact analytic gradients; nothing here depends on an
autodiff framework.  Double precision is the default so gradients can be
verified against central finite differences.
"""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "tanh", "none")


class ShapeError(ValueError):
    pass


def _apply_activation(pre: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(pre, 0.0)
    if activation == "tanh":
        return np.tanh(pre)
    if activation == "none":
        return pre
    raise ShapeError(f"unknown activation: {activation!r}")


def _activation_grad(pre: np.ndarray, out: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return (pre > 0).astype(pre.dtype)
    if activation == "tanh":
        return 1.0 - out * out
    return np.ones_like(pre)


# ---------------------------------------------------------------------------
# Dense
# ---------------------------------------------------------------------------

def dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray, activation: str = "none"):
    """y = act(x W + b).  ``x`` may be a vector or a (batch, in) matrix.

    Returns (y, cache) where cache feeds :func:`dense_backward`.
    """
    if x.shape[-1] != W.shape[0] or W.shape[1] != b.shape[0]:
        raise ShapeError(
            f"dense shape mismatch: x{x.shape} W{W.shape} b{b.shape}"
        )
    pre = x @ W + b
    out = _apply_activation(pre, activation)
    return out, (x, W, pre, out, activation)


def dense_backward(dy: np.ndarray, cache):
    """Gradients (dx, dW, db) for :func:`dense_forward`."""
    x, W, pre, out, activation = cache
    dpre = dy * _activation_grad(pre, out, activation)
    if x.ndim == 1:
        dW = np.outer(x, dpre)
        db = dpre
    else:
        dW = x.T @ dpre
        db = dpre.sum(axis=0)
    dx = dpre @ W.T
    return dx, dW, db


# ---------------------------------------------------------------------------
# 1-D convolution over the time axis (same-length, zero padded)
# ---------------------------------------------------------------------------

def conv1d_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray, activation: str = "none"):
    """Same-length 1-D convolution.

    ``x`` is (T, d_in); ``W`` is (width, d_in, d_out) with odd width; the
    sequence is zero padded by width//2 on both sides so the output is also
    T steps long.
    """
    width = W.shape[0]
    if width % 2 != 1:
        raise ShapeError("conv width must be odd")
    if x.ndim != 2 or x.shape[1] != W.shape[1] or W.shape[2] != b.shape[0]:
        raise ShapeError(f"conv shape mismatch: x{x.shape} W{W.shape} b{b.shape}")
    T = x.shape[0]
    pad = width // 2
    xp = np.zeros((T + 2 * pad, x.shape[1]), dtype=x.dtype)
    xp[pad:pad + T] = x
    pre = np.tile(b, (T, 1)).astype(x.dtype)
    for k in range(width):
        pre += xp[k:k + T] @ W[k]
    out = _apply_activation(pre, activation)
    return out, (x, xp, W, pre, out, activation)


def conv1d_backward(dy: np.ndarray, cache):
    """Gradients (dx, dW, db) for :func:`conv1d_forward`."""
    x, xp, W, pre, out, activation = cache
    width = W.shape[0]
    T = x.shape[0]
    pad = width // 2
    dpre = dy * _activation_grad(pre, out, activation)
    dW = np.zeros_like(W)
    dxp = np.zeros_like(xp)
    for k in range(width):
        dW[k] = xp[k:k + T].T @ dpre
        dxp[k:k + T] += dpre @ W[k].T
    db = dpre.sum(axis=0)
    return dxp[pad:pad + T], dW, db


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_forward(x: np.ndarray, mask: np.ndarray, Wx: np.ndarray,
                 Wh: np.ndarray, b: np.ndarray):
    """Standard LSTM over (T, d_in) input with a per-step validity mask.

    Gate order in the stacked weight matrices is input, forget, cell
    candidate, output.  Masked (padding) steps copy hidden and cell state
    through unchanged, so trailing padding never alters the final state.

    Returns (h_seq, h_final, cache).
    """
    H4 = Wx.shape[1]
    if H4 % 4 != 0:
        raise ShapeError("stacked gate dimension must be divisible by 4")
    H = H4 // 4
    if x.shape[1] != Wx.shape[0] or Wh.shape != (H, H4) or b.shape != (H4,):
        raise ShapeError(f"lstm shape mismatch: x{x.shape} Wx{Wx.shape} Wh{Wh.shape}")
    T = x.shape[0]
    h = np.zeros(H, dtype=x.dtype)
    c = np.zeros(H, dtype=x.dtype)
    h_seq = np.zeros((T, H), dtype=x.dtype)
    steps = []
    for t in range(T):
        if mask[t]:
            z = x[t] @ Wx + h @ Wh + b
            i = _sigmoid(z[:H])
            f = _sigmoid(z[H:2 * H])
            g = np.tanh(z[2 * H:3 * H])
            o = _sigmoid(z[3 * H:])
            c_prev, h_prev = c, h
            c = f * c_prev + i * g
            h = o * np.tanh(c)
            steps.append((i, f, g, o, c_prev, h_prev, c))
        else:
            steps.append(None)
        h_seq[t] = h
    return h_seq, h, (x, mask, Wx, Wh, steps, H)


def lstm_backward(dh_final: np.ndarray, cache):
    """Backpropagate a gradient on the final hidden state.

    Returns (dx, dWx, dWh, db).  Masked steps pass the running state
    gradients through untouched, mirroring the forward copy.
    """
    x, mask, Wx, Wh, steps, H = cache
    T = x.shape[0]
    dx = np.zeros_like(x)
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * H, dtype=x.dtype)
    dh = dh_final.copy()
    dc = np.zeros(H, dtype=x.dtype)
    for t in range(T - 1, -1, -1):
        if steps[t] is None:
            continue
        i, f, g, o, c_prev, h_prev, c = steps[t]
        tanh_c = np.tanh(c)
        do = dh * tanh_c
        dct = dc + dh * o * (1.0 - tanh_c * tanh_c)
        di = dct * g
        df = dct * c_prev
        dg = dct * i
        da = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ])
        dWx += np.outer(x[t], da)
        dWh += np.outer(h_prev, da)
        db += da
        dx[t] = da @ Wx.T
        dh = da @ Wh.T
        dc = dct * f
    return dx, dWx, dWh, db


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max subtraction)."""
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def softmax_cross_entropy(logits: np.ndarray, label: int):
    """loss = -log softmax(logits)[label]; grad = softmax - onehot."""
    n = logits.shape[0]
    if not 0 <= label < n:
        raise ShapeError(f"label {label} out of range for {n} classes")
    z = logits - logits.max()
    log_norm = np.log(np.exp(z).sum())
    loss = float(log_norm - z[label])
    grad = np.exp(z - log_norm)
    grad[label] -= 1.0
    return loss, grad


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

class AdamState:
    """First/second moment accumulators, zero initialized."""

    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, t: int, cfg) -> tuple[dict[str, np.ndarray], AdamState]:
    """One Adam update with bias correction.

    ``cfg`` supplies learning_rate / adam_beta1 / adam_beta2 / adam_eps.
    Inputs are left untouched; the returned collections are fresh.
    """
    if t < 1:
        raise ShapeError("Adam step index starts at 1")
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.learning_rate
    new_params: dict[str, np.ndarray] = {}
    new_state = AdamState({})
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape or state.m[name].shape != p.shape:
            raise ShapeError(f"shape mismatch for parameter {name!r}")
        m = b1 * state.m[name] + (1.0 - b1) * g
        v = b2 * state.v[name] + (1.0 - b2) * (g * g)
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_state.m[name] = m
        new_state.v[name] = v
    return new_params, new_state


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------

def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int,
                   dtype=np.float64) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)
