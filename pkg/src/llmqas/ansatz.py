"""Ansatz block candidates, entanglement maps and the proposal grammar.

Block tags (what a proposer writes in ``improved_ansatz_list``):

    1  CZ + RX            RX layer, then a linear CZ chain
    2  CZ + (RX, RY)      RX layer, RY layer, CZ chain
    3  CZ + (RX, RY, RZ)  RX, RY, RZ layers, CZ chain
    4  CZ only            CZ chain
    5  TwoLocal           configured rotation layers, then CZ on the
                          configured entanglement map

A TwoLocal block needs an extra reply line of the form::

    twolocal_config = {"block": 2, "rotations": ["RY", "RZ"], "entanglement": "circular"}

where ``block`` is the 0-based position in the list.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    InvalidBlockIndex,
    MalformedTwoLocalConfig,
    MissingTwoLocalConfig,
    NoAnsatzList,
)
from .statevector import ROTATIONS, Circuit, Gate

TWO_LOCAL = 5
BLOCK_ROTATIONS = {1: ("RX",), 2: ("RX", "RY"), 3: ("RX", "RY", "RZ"), 4: ()}

BLOCK_DESCRIPTIONS = {
    1: "CZ and RX: an RX rotation on every qubit, followed by a linear chain of CZ gates.",
    2: "CZ and (RX, RY): an RX layer and an RY layer on every qubit, followed by a linear chain of CZ gates.",
    3: "CZ and (RX, RY, RZ): RX, RY and RZ layers on every qubit, followed by a linear chain of CZ gates.",
    4: "CZ only: a linear chain of CZ gates without parameters.",
    5: "TwoLocal: one layer per chosen rotation gate (any of RX, RY, RZ) on every qubit, followed by CZ "
    "gates placed according to the chosen entanglement strategy (full, linear, reverse_linear, "
    "pairwise, circular, sca).",
}


class Entanglement(str, enum.Enum):
    FULL = "full"
    LINEAR = "linear"
    REVERSE_LINEAR = "reverse_linear"
    PAIRWISE = "pairwise"
    CIRCULAR = "circular"
    SCA = "sca"

    @classmethod
    def parse(cls, name) -> "Entanglement":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        if key == "reverselinear":
            key = "reverse_linear"
        try:
            return cls(key)
        except ValueError:
            raise MalformedTwoLocalConfig(f"unknown entanglement strategy {name!r}") from None


@dataclass(frozen=True)
class TwoLocalConfig:
    rotations: tuple[str, ...]
    entanglement: Entanglement = Entanglement.LINEAR

    def __post_init__(self):
        if isinstance(self.rotations, str) or not hasattr(self.rotations, "__iter__"):
            raise MalformedTwoLocalConfig(f"rotations must be a list of gate names, got {self.rotations!r}")
        rots = tuple(str(r).strip().upper() for r in self.rotations)
        if not 1 <= len(rots) <= 3 or len(set(rots)) != len(rots) or not set(rots) <= set(ROTATIONS):
            raise MalformedTwoLocalConfig(f"rotations must be 1-3 distinct members of {ROTATIONS}, got {rots}")
        object.__setattr__(self, "rotations", rots)
        object.__setattr__(self, "entanglement", Entanglement.parse(self.entanglement))

    def to_dict(self) -> dict:
        return {"rotations": list(self.rotations), "entanglement": self.entanglement.value}


@dataclass(frozen=True)
class AnsatzSpec:
    blocks: tuple[int, ...]
    twolocal: Mapping[int, TwoLocalConfig] = field(default_factory=dict)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise InvalidBlockIndex("an ansatz needs at least one block")
        for b in blocks:
            if isinstance(b, bool) or not isinstance(b, int) or not 1 <= b <= 5:
                raise InvalidBlockIndex(f"block tags must be integers 1-5, got {b!r}")
        configs = dict(self.twolocal)
        for pos, b in enumerate(blocks):
            if b == TWO_LOCAL and pos not in configs:
                raise MissingTwoLocalConfig(f"TwoLocal block at position {pos} has no configuration")
        for pos in configs:
            if not (0 <= pos < len(blocks)) or blocks[pos] != TWO_LOCAL:
                raise MalformedTwoLocalConfig(f"configuration given for position {pos}, which is not a TwoLocal block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "twolocal", {k: configs[k] for k in sorted(configs)})

    def to_dict(self) -> dict:
        return {
            "blocks": list(self.blocks),
            "twolocal": {str(k): v.to_dict() for k, v in self.twolocal.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzSpec":
        return cls(
            tuple(d["blocks"]),
            {int(k): TwoLocalConfig(tuple(v["rotations"]), v["entanglement"]) for k, v in d.get("twolocal", {}).items()},
        )

    def __str__(self):
        return render_proposal(self).splitlines()[0].split("=", 1)[1].strip()


def entanglement_pairs(strategy, n: int, block_index: int = 0) -> list[tuple[int, int]]:
    """Ordered (control, target) pairs for one entangling layer."""
    strategy = Entanglement.parse(strategy)
    if n < 2:
        return []
    linear = [(i, i + 1) for i in range(n - 1)]
    if strategy is Entanglement.FULL:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    if strategy is Entanglement.LINEAR:
        return linear
    if strategy is Entanglement.REVERSE_LINEAR:
        return linear[::-1]
    if strategy is Entanglement.PAIRWISE:
        return linear[0::2] + linear[1::2]
    # circular / sca: on two qubits the wrap pair would duplicate (0, 1)
    circular = linear if n == 2 else [(n - 1, 0)] + linear
    if strategy is Entanglement.CIRCULAR:
        return circular
    shift = block_index % len(circular)
    shifted = circular[len(circular) - shift:] + circular[: len(circular) - shift]
    if block_index % 2 == 1:
        return [(t, c) for c, t in shifted]
    return shifted


def _block_gates(tag: int, n: int, position: int, config: TwoLocalConfig | None) -> list[tuple[str, tuple[int, ...]]]:
    if tag == TWO_LOCAL:
        rotations = config.rotations
        pairs = entanglement_pairs(config.entanglement, n, position)
    else:
        rotations = BLOCK_ROTATIONS[tag]
        pairs = entanglement_pairs(Entanglement.LINEAR, n)
    layers = [(rot, (q,)) for rot in rotations for q in range(n)]
    return layers + [("CZ", p) for p in pairs]


def build_circuit(spec: AnsatzSpec, n: int) -> Circuit:
    if not isinstance(spec, AnsatzSpec):
        spec = AnsatzSpec(tuple(spec))
    gates = []
    slot = 0
    for pos, tag in enumerate(spec.blocks):
        if not 1 <= tag <= 5:
            raise InvalidBlockIndex(f"unknown block tag {tag}")
        config = spec.twolocal.get(pos)
        if tag == TWO_LOCAL and config is None:
            raise MissingTwoLocalConfig(f"TwoLocal block at position {pos} has no configuration")
        for kind, qubits in _block_gates(tag, n, pos, config):
            if kind in ROTATIONS:
                gates.append(Gate(kind, qubits, slot))
                slot += 1
            else:
                gates.append(Gate(kind, qubits))
    return Circuit(n, tuple(gates))


def rotations_per_qubit(tag: int, config: TwoLocalConfig | None = None) -> int:
    return len(config.rotations) if tag == TWO_LOCAL else len(BLOCK_ROTATIONS[tag])


# -- proposal grammar --------------------------------------------------------

LIST_RE = re.compile(r"improved_ansatz_list\s*=\s*\[([^\]]*)\]")
CONFIG_RE = re.compile(r"twolocal_config\s*=\s*(\{[^\n]*\})")


def parse_proposal(text: str) -> AnsatzSpec:
    m = LIST_RE.search(text)
    if m is None:
        raise NoAnsatzList("reply contains no 'improved_ansatz_list = [...]' line")
    tokens = [t.strip() for t in m.group(1).split(",")]
    if tokens == [""]:
        raise InvalidBlockIndex("improved_ansatz_list is empty")
    blocks = []
    for tok in tokens:
        if not re.fullmatch(r"[+-]?\d+", tok):
            raise InvalidBlockIndex(f"block entry {tok!r} is not an integer")
        value = int(tok)
        if not 1 <= value <= 5:
            raise InvalidBlockIndex(f"block entry {value} is outside 1..5")
        blocks.append(value)

    configs: dict[int, TwoLocalConfig] = {}
    for cm in CONFIG_RE.finditer(text, m.end()):
        raw = cm.group(1)
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedTwoLocalConfig(f"cannot decode {raw!r}: {exc}") from None
        if not isinstance(payload, dict) or not {"block", "rotations", "entanglement"} <= payload.keys():
            raise MalformedTwoLocalConfig(f"config needs 'block', 'rotations' and 'entanglement': {raw!r}")
        pos = payload["block"]
        if isinstance(pos, bool) or not isinstance(pos, int) or not 0 <= pos < len(blocks):
            raise MalformedTwoLocalConfig(f"config block index {pos!r} out of range")
        if blocks[pos] != TWO_LOCAL:
            raise MalformedTwoLocalConfig(f"config refers to block {pos}, which is not TwoLocal")
        if pos in configs:
            continue
        configs[pos] = TwoLocalConfig(payload["rotations"], payload["entanglement"])
    return AnsatzSpec(tuple(blocks), configs)


def render_proposal(spec: AnsatzSpec) -> str:
    lines = [f"improved_ansatz_list = [{','.join(str(b) for b in spec.blocks)}]"]
    for pos, cfg in spec.twolocal.items():
        payload = {"block": pos, **cfg.to_dict()}
        lines.append(f"twolocal_config = {json.dumps(payload)}")
    return "\n".join(lines) + "\n"
