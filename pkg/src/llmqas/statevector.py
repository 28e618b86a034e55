"""Dense statevector simulation over the gate set {H, RX, RY, RZ, CZ}.

Basis ordering: amplitude index ``k`` reads qubit 0 as the least-significant
bit, so qubit ``q`` of basis state ``k`` is ``(k >> q) & 1``.

The public functions (``apply_gate``, ``apply_circuit``) have value
semantics and never mutate their inputs. ``simulate_batch`` is the
vectorised kernel used by the generator, evaluating one circuit for many
parameter vectors at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidQubit, InvalidQubitCount, MissingParameter, ParamLengthMismatch

MAX_QUBITS = 20
ROTATIONS = ("RX", "RY", "RZ")
GATE_KINDS = ("H", "CZ") + ROTATIONS
_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    param_slot: Optional[int] = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        arity = 2 if self.kind == "CZ" else 1
        if len(qubits) != arity:
            raise InvalidQubit(f"{self.kind} acts on {arity} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise InvalidQubit(f"{self.kind} qubits must be distinct, got {qubits}")
        if any(q < 0 for q in qubits):
            raise InvalidQubit(f"negative qubit index in {qubits}")
        if (self.kind in ROTATIONS) != (self.param_slot is not None):
            raise ValueError(f"param_slot must be set exactly for rotation gates ({self.kind})")

    def __str__(self):
        slot = f"[s{self.param_slot}]" if self.param_slot is not None else ""
        return f"{self.kind}{slot}{self.qubits}"


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_params: int = field(init=False)

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            if max(g.qubits) >= self.n_qubits:
                raise InvalidQubit(f"{g} out of range for {self.n_qubits} qubits")
        slots = sorted(g.param_slot for g in gates if g.param_slot is not None)
        if slots != list(range(len(slots))):
            raise ValueError("parameter slots must be exactly 0..n_params-1, each used once")
        object.__setattr__(self, "n_params", len(slots))

    def __add__(self, other: "Circuit") -> "Circuit":
        """Concatenate, renumbering the right operand's parameter slots."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits on different qubit counts")
        shifted = tuple(
            Gate(g.kind, g.qubits, None if g.param_slot is None else g.param_slot + self.n_params)
            for g in other.gates
        )
        return Circuit(self.n_qubits, self.gates + shifted)


def _check_qubit_count(n) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or not 1 <= n <= MAX_QUBITS:
        raise InvalidQubitCount(f"qubit count must be an integer in [1, {MAX_QUBITS}], got {n!r}")


def zero_state(n: int) -> StateVector:
    _check_qubit_count(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def rotation_matrix(kind: str, theta) -> np.ndarray:
    """2x2 matrix of exp(-i theta P / 2); ``theta`` may be an array (leading batch axes)."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=np.complex128)
    if kind == "RX":
        out[..., 0, 0] = c
        out[..., 0, 1] = -1j * s
        out[..., 1, 0] = -1j * s
        out[..., 1, 1] = c
    elif kind == "RY":
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
    elif kind == "RZ":
        out[..., 0, 0] = c - 1j * s
        out[..., 0, 1] = 0.0
        out[..., 1, 0] = 0.0
        out[..., 1, 1] = c + 1j * s
    else:
        raise ValueError(f"{kind} is not a rotation")
    return out


_HADAMARD = _INV_SQRT2 * np.array([[1, 1], [1, -1]], dtype=np.complex128)


def _apply_1q(states: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    # states: (B, 2**n); mat: (2, 2) or (B, 2, 2)
    b = states.shape[0]
    view = states.reshape(b, 2 ** (n - q - 1), 2, 2**q)
    s0 = view[:, :, 0, :]
    s1 = view[:, :, 1, :]
    if mat.ndim == 2:
        m00, m01, m10, m11 = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
    else:
        m00, m01, m10, m11 = (mat[:, i, j, None, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    out = np.empty_like(view)
    out[:, :, 0, :] = m00 * s0 + m01 * s1
    out[:, :, 1, :] = m10 * s0 + m11 * s1
    return out.reshape(b, 2**n)


def _cz_mask(n: int, a: int, b: int) -> np.ndarray:
    k = np.arange(2**n)
    return ((k >> a) & 1).astype(bool) & ((k >> b) & 1).astype(bool)


def _apply_inplace(states: np.ndarray, n: int, gate: Gate, angles: Optional[np.ndarray]) -> np.ndarray:
    if gate.kind == "CZ":
        states[:, _cz_mask(n, *gate.qubits)] *= -1.0
        return states
    if gate.kind == "H":
        return _apply_1q(states, n, gate.qubits[0], _HADAMARD)
    return _apply_1q(states, n, gate.qubits[0], rotation_matrix(gate.kind, angles))


def _check_gate(n: int, gate: Gate) -> None:
    if max(gate.qubits) >= n:
        raise InvalidQubit(f"{gate} out of range for {n} qubits")


def apply_gate(state: StateVector, gate: Gate, params: Sequence[float] = ()) -> StateVector:
    n = state.n_qubits
    _check_gate(n, gate)
    angle = None
    if gate.param_slot is not None:
        params = np.asarray(params, dtype=float).ravel()
        if gate.param_slot >= params.size:
            raise MissingParameter(f"{gate} needs slot {gate.param_slot}, only {params.size} params given")
        angle = params[gate.param_slot]
    out = _apply_inplace(state.amplitudes[None, :].copy(), n, gate, angle)
    return StateVector(n, out[0])


def simulate_batch(circuit: Circuit, thetas: np.ndarray, initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Run ``circuit`` once per row of ``thetas`` (shape (B, n_params)); returns (B, 2**n) amplitudes."""
    n = circuit.n_qubits
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2 or thetas.shape[1] != circuit.n_params:
        raise ParamLengthMismatch(
            f"thetas must have shape (B, {circuit.n_params}), got {thetas.shape}"
        )
    if initial is None:
        initial = zero_state(n).amplitudes
    states = np.repeat(np.asarray(initial, dtype=np.complex128)[None, :], thetas.shape[0], axis=0)
    for g in circuit.gates:
        angles = thetas[:, g.param_slot] if g.param_slot is not None else None
        states = _apply_inplace(states, n, g, angles)
    return states


def apply_circuit(state: StateVector, circuit: Circuit, params: Sequence[float] = ()) -> StateVector:
    if circuit.n_qubits != state.n_qubits:
        raise InvalidQubit(f"circuit on {circuit.n_qubits} qubits applied to {state.n_qubits}-qubit state")
    params = np.asarray(params, dtype=float).ravel()
    if params.size != circuit.n_params:
        raise ParamLengthMismatch(f"circuit has {circuit.n_params} parameters, got {params.size}")
    out = simulate_batch(circuit, params[None, :], state.amplitudes)
    return StateVector(state.n_qubits, out[0])


def probabilities(state) -> np.ndarray:
    """Born-rule probabilities |a_k|^2; accepts a StateVector or a raw amplitude array."""
    amps = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
    return np.abs(amps) ** 2


def circuit_depth(circuit: Circuit) -> int:
    # greedy as-soon-as-possible layering: a gate lands one layer after the
    # deepest gate already touching any of its qubits
    level = [0] * circuit.n_qubits
    for g in circuit.gates:
        layer = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = layer
    return max(level, default=0)


def circuit_param_count(circuit: Circuit) -> int:
    return circuit.n_params
