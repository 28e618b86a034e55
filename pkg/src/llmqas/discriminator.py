"""Classical discriminator: a NumPy MLP with analytic backpropagation.

Hidden layer order is linear -> LeakyReLU(0.2) -> BatchNorm -> dropout(0.3);
the output layer is linear -> sigmoid. Default widths are
1 -> 256 -> 128 -> 64 -> 32 -> 16 -> 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .errors import BatchTooSmall, LengthMismatch

DEFAULT_WIDTHS = (1, 256, 128, 64, 32, 16, 1)
CLAMP = 1e-12

TRAIN = "train"
INFER = "infer"


@dataclass
class DiscriminatorNet:
    widths: tuple[int, ...] = DEFAULT_WIDTHS
    params: dict[str, np.ndarray] = field(default_factory=dict)
    running_mean: list[np.ndarray] = field(default_factory=list)
    running_var: list[np.ndarray] = field(default_factory=list)
    negative_slope: float = 0.2
    dropout: float = 0.3
    momentum: float = 0.1
    eps: float = 1e-5
    mode: str = TRAIN

    @property
    def n_hidden(self) -> int:
        return len(self.widths) - 2

    @classmethod
    def create(cls, rng: np.random.Generator, widths=DEFAULT_WIDTHS, **kwargs) -> "DiscriminatorNet":
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2 or widths[-1] != 1:
            raise ValueError(f"widths must end in a single output unit, got {widths}")
        params = {}
        for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            params[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            params[f"b{i}"] = np.zeros(fan_out)
            if i < len(widths) - 2:
                params[f"gamma{i}"] = np.ones(fan_out)
                params[f"beta{i}"] = np.zeros(fan_out)
        hidden = widths[1:-1]
        return cls(
            widths=widths,
            params=params,
            running_mean=[np.zeros(w) for w in hidden],
            running_var=[np.ones(w) for w in hidden],
            **kwargs,
        )

    def param_names(self) -> list[str]:
        return list(self.params)

    def copy(self) -> "DiscriminatorNet":
        return DiscriminatorNet(
            widths=self.widths,
            params={k: v.copy() for k, v in self.params.items()},
            running_mean=[a.copy() for a in self.running_mean],
            running_var=[a.copy() for a in self.running_var],
            negative_slope=self.negative_slope,
            dropout=self.dropout,
            momentum=self.momentum,
            eps=self.eps,
            mode=self.mode,
        )

    def to_dict(self) -> dict:
        return {
            "widths": list(self.widths),
            "params": {k: v.tolist() for k, v in self.params.items()},
            "running_mean": [a.tolist() for a in self.running_mean],
            "running_var": [a.tolist() for a in self.running_var],
            "negative_slope": self.negative_slope,
            "dropout": self.dropout,
            "momentum": self.momentum,
            "eps": self.eps,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiscriminatorNet":
        return cls(
            widths=tuple(d["widths"]),
            params={k: np.asarray(v, dtype=float) for k, v in d["params"].items()},
            running_mean=[np.asarray(a, dtype=float) for a in d["running_mean"]],
            running_var=[np.asarray(a, dtype=float) for a in d["running_var"]],
            negative_slope=d["negative_slope"],
            dropout=d["dropout"],
            momentum=d["momentum"],
            eps=d["eps"],
            mode=d["mode"],
        )


@dataclass
class BCEBatch:
    inputs: np.ndarray
    labels: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float).ravel()
        if len(self.inputs) != len(self.labels):
            raise LengthMismatch("inputs and labels differ in length")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float).ravel()
            if len(self.weights) != len(self.labels):
                raise LengthMismatch("weights and labels differ in length")
            if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
                raise ValueError("weights must be finite and nonnegative")


def _as_rows(net: DiscriminatorNet, inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] != net.widths[0]:
        raise ValueError(f"expected {net.widths[0]} input features, got {x.shape[1]}")
    return x


def _dropout_masks(net: DiscriminatorNet, n_rows: int, rng_seed) -> list[np.ndarray]:
    rng = np.random.default_rng(rng_seed)
    keep = np.float32(1.0 - net.dropout)
    return [rng.random((n_rows, w), dtype=np.float32) < keep for w in net.widths[1:-1]]


@njit(cache=True)
def _hidden_train_forward(z, slope, gamma, beta, eps, mask, scale, use_mask):
    # LeakyReLU -> BatchNorm (batch statistics) -> dropout, fused over rows
    n, f = z.shape
    xhat = np.empty_like(z)
    out = np.empty_like(z)
    mean = np.zeros(f)
    var = np.zeros(f)
    for i in range(n):
        for j in range(f):
            v = z[i, j]
            h = v if v > 0 else slope * v
            xhat[i, j] = h
            mean[j] += h
    mean /= n
    for i in range(n):
        for j in range(f):
            d = xhat[i, j] - mean[j]
            var[j] += d * d
    var /= n
    inv_std = 1.0 / np.sqrt(var + eps)
    for i in range(n):
        for j in range(f):
            xh = (xhat[i, j] - mean[j]) * inv_std[j]
            xhat[i, j] = xh
            y = gamma[j] * xh + beta[j]
            if use_mask:
                y = y * scale if mask[i, j] else 0.0
            out[i, j] = y
    return out, xhat, mean, var, inv_std


@njit(cache=True)
def _hidden_train_backward(da, z, xhat, gamma, inv_std, slope, mask, scale, use_mask):
    n, f = da.shape
    dy = np.empty_like(da)
    dgamma = np.zeros(f)
    dbeta = np.zeros(f)
    for i in range(n):
        for j in range(f):
            g = da[i, j]
            if use_mask:
                g = g * scale if mask[i, j] else 0.0
            dy[i, j] = g
            dgamma[j] += g * xhat[i, j]
            dbeta[j] += g
    # d/dh of the batch-normalised output, folded with the LeakyReLU slope
    c0 = gamma * dbeta / n
    c1 = gamma * dgamma / n
    for i in range(n):
        for j in range(f):
            v = inv_std[j] * (gamma[j] * dy[i, j] - c0[j] - xhat[i, j] * c1[j])
            dy[i, j] = v if z[i, j] > 0 else slope * v
    return dy, dgamma, dbeta


_NO_MASK = np.zeros((0, 0), dtype=np.bool_)


def _forward(net, x, mode, rng_seed, update_running):
    """Returns (outputs, cache). ``cache`` holds what the backward pass needs."""
    train = mode == TRAIN
    if train and len(x) < 2:
        raise BatchTooSmall("Train-mode forward needs at least 2 rows for batch statistics")
    use_dropout = train and net.dropout > 0
    if use_dropout and rng_seed is None:
        raise ValueError("Train mode with dropout needs an rng_seed")
    masks = _dropout_masks(net, len(x), rng_seed) if use_dropout else None
    scale = 0.0 if net.dropout >= 1 else 1.0 / (1.0 - net.dropout)
    p = net.params
    a = x
    cache = []
    for i in range(net.n_hidden):
        z = a @ p[f"W{i}"] + p[f"b{i}"]
        gamma, beta = p[f"gamma{i}"], p[f"beta{i}"]
        if train:
            mask = masks[i] if use_dropout else _NO_MASK
            out, xhat, mean, var, inv_std = _hidden_train_forward(
                z, net.negative_slope, gamma, beta, net.eps, mask, scale, use_dropout
            )
            if update_running:
                n = len(z)
                net.running_mean[i] = (1 - net.momentum) * net.running_mean[i] + net.momentum * mean
                net.running_var[i] = (1 - net.momentum) * net.running_var[i] + net.momentum * var * n / (n - 1)
            cache.append((a, z, xhat, inv_std, mask))
        else:
            h = np.where(z > 0, z, net.negative_slope * z)
            out = gamma * (h - net.running_mean[i]) / np.sqrt(net.running_var[i] + net.eps) + beta
        a = out
    last = net.n_hidden
    logits = (a @ p[f"W{last}"] + p[f"b{last}"])[:, 0]
    outputs = 1.0 / (1.0 + np.exp(-logits))
    cache.append((a, logits))
    return outputs, cache


def disc_forward(net: DiscriminatorNet, inputs, rng_seed=None, mode: Optional[str] = None) -> np.ndarray:
    """D(x) for each row. Train mode uses batch statistics and updates running stats."""
    mode = mode or net.mode
    outputs, _ = _forward(net, _as_rows(net, inputs), mode, rng_seed, update_running=(mode == TRAIN))
    return outputs


def bce_loss(outputs, labels, weights=None) -> float:
    o = np.clip(np.asarray(outputs, dtype=float), CLAMP, 1 - CLAMP)
    y = np.asarray(labels, dtype=float)
    if o.shape != y.shape:
        raise LengthMismatch(f"outputs {o.shape} and labels {y.shape} differ")
    w = np.full(o.shape, 1.0 / o.size) if weights is None else np.asarray(weights, dtype=float)
    return float(-np.sum(w * (y * np.log(o) + (1 - y) * np.log(1 - o))))


def disc_backward(
    net: DiscriminatorNet, batch: BCEBatch, rng_seed=None, update_running_stats: bool = False
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and analytic gradients of ``bce_loss`` on a Train-mode forward pass.

    The forward pass is recomputed with ``rng_seed`` so dropout masks match
    the paired ``disc_forward`` call. Running statistics are only touched
    when ``update_running_stats`` is set.
    """
    x = _as_rows(net, batch.inputs)
    outputs, cache = _forward(net, x, TRAIN, rng_seed, update_running_stats)
    y = batch.labels
    n = len(y)
    w = np.full(n, 1.0 / n) if batch.weights is None else batch.weights
    loss = bce_loss(outputs, y, w)

    p = net.params
    grads: dict[str, np.ndarray] = {}
    # d/dlogit of -[y ln s + (1-y) ln(1-s)] is s - y; zero where the clamp is active
    inside = (outputs > CLAMP) & (outputs < 1 - CLAMP)
    dlogits = np.where(inside, w * (outputs - y), 0.0)
    a, _ = cache[-1]
    last = net.n_hidden
    grads[f"W{last}"] = a.T @ dlogits[:, None]
    grads[f"b{last}"] = np.array([dlogits.sum()])
    da = dlogits[:, None] @ p[f"W{last}"].T

    use_dropout = net.dropout > 0
    scale = 0.0 if net.dropout >= 1 else 1.0 / (1.0 - net.dropout)
    for i in reversed(range(net.n_hidden)):
        a_prev, z, xhat, inv_std, mask = cache[i]
        dz, grads[f"gamma{i}"], grads[f"beta{i}"] = _hidden_train_backward(
            da, z, xhat, p[f"gamma{i}"], inv_std, net.negative_slope, mask, scale, use_dropout
        )
        grads[f"W{i}"] = a_prev.T @ dz
        grads[f"b{i}"] = dz.sum(axis=0)
        if i > 0:
            da = dz @ p[f"W{i}"].T
    return loss, {k: grads[k] for k in net.params}
