"""Quantum generator: Hadamard preparation followed by a trainable ansatz.

The generator emits its exact output distribution p_theta over the 2**n
computational basis states. Gradients use the parameter-shift rule, which
is exact for RX/RY/RZ gates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDiscriminatorOutput, ParamLengthMismatch
from .statevector import Circuit, simulate_batch

SHIFT = np.pi / 2


@dataclass
class GeneratorModel:
    n_qubits: int
    ansatz: Circuit
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).ravel().copy()
        if self.ansatz.n_qubits != self.n_qubits:
            raise ValueError("ansatz qubit count differs from generator qubit count")
        if self.theta.size != self.ansatz.n_params:
            raise ParamLengthMismatch(f"ansatz has {self.ansatz.n_params} parameters, theta has {self.theta.size}")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be finite")

    @classmethod
    def initialize(cls, ansatz: Circuit, rng: np.random.Generator, scale: float = np.pi) -> "GeneratorModel":
        """Angles drawn uniformly from [-scale, scale]."""
        theta = rng.uniform(-scale, scale, size=ansatz.n_params)
        return cls(ansatz.n_qubits, ansatz, theta)


def plus_state(n: int) -> np.ndarray:
    """H^{(x)n}|0...0>, the uniform superposition."""
    return np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128)


def _distributions(model: GeneratorModel, thetas: np.ndarray) -> np.ndarray:
    amps = simulate_batch(model.ansatz, thetas, plus_state(model.n_qubits))
    return amps.real**2 + amps.imag**2


def generator_distribution(model: GeneratorModel) -> np.ndarray:
    return _distributions(model, model.theta[None, :])[0]


def distribution_jacobian(model: GeneratorModel) -> np.ndarray:
    """(2**n, n_params) matrix of dp_k/dtheta_j by the parameter-shift rule."""
    p = model.theta.size
    if p == 0:
        return np.zeros((2**model.n_qubits, 0))
    shifts = SHIFT * np.eye(p)
    thetas = np.concatenate([model.theta + shifts, model.theta - shifts])
    dists = _distributions(model, thetas)
    return ((dists[:p] - dists[p:]) / 2).T


def generator_loss_and_grad(model: GeneratorModel, disc_outputs_per_bin) -> tuple[float, np.ndarray]:
    """Non-saturating generator loss -sum_k p_theta(k) ln D(x_k) and its gradient."""
    d = np.asarray(disc_outputs_per_bin, dtype=float)
    if d.shape != (2**model.n_qubits,):
        raise ValueError(f"need one discriminator output per bin ({2**model.n_qubits}), got {d.shape}")
    if not np.all((d > 0) & (d <= 1)):
        raise InvalidDiscriminatorOutput("discriminator outputs must lie in (0, 1]")
    log_d = np.log(d)
    loss = -float(generator_distribution(model) @ log_d)
    grad = -(distribution_jacobian(model).T @ log_d)
    return loss, grad
