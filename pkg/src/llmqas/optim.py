"""AMSGRAD, in the reference form without bias correction.

    m     <- b1 m + (1 - b1) g
    v     <- b2 v + (1 - b2) g^2
    v_hat <- max(v_hat, v)
    p     <- p - lr m / (sqrt(v_hat) + eps)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteGradient


@dataclass
class AmsgradState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    vhat: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def to_dict(self) -> dict:
        enc = lambda d: {k: a.tolist() for k, a in d.items()}  # noqa: E731
        return {"m": enc(self.m), "v": enc(self.v), "vhat": enc(self.vhat), "step": self.step,
                "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}

    @classmethod
    def from_dict(cls, d: dict) -> "AmsgradState":
        dec = lambda x: {k: np.asarray(a, dtype=float) for k, a in x.items()}  # noqa: E731
        return cls(dec(d["m"]), dec(d["v"]), dec(d["vhat"]), d["step"], d["beta1"], d["beta2"], d["eps"])


def amsgrad_step(state: AmsgradState, params, grads, lr: float):
    """One update. ``params``/``grads`` are both arrays or both dicts of arrays.

    Returns ``(new_params, new_state)``; inputs are left untouched.
    """
    single = not isinstance(params, dict)
    if single:
        params, grads = {"_": params}, {"_": grads}
    if params.keys() != grads.keys():
        raise ValueError("params and grads have different keys")
    b1, b2 = state.beta1, state.beta2
    new = AmsgradState(step=state.step + 1, beta1=b1, beta2=b2, eps=state.eps)
    out = {}
    for k, p in params.items():
        g = np.asarray(grads[k], dtype=float)
        p = np.asarray(p, dtype=float)
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} differs from parameter shape {p.shape} for {k!r}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient for {k!r}")
        zeros = np.zeros_like(p)
        m = b1 * state.m.get(k, zeros) + (1 - b1) * g
        v = b2 * state.v.get(k, zeros) + (1 - b2) * g * g
        vhat = np.maximum(state.vhat.get(k, zeros), v)
        new.m[k], new.v[k], new.vhat[k] = m, v, vhat
        out[k] = p - lr * m / (np.sqrt(vhat) + state.eps)
    return (out["_"] if single else out), new
