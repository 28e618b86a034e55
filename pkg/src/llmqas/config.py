"""Campaign configuration: dataclass, validation and YAML load/save.

A minimal config file only needs the keys it wants to change::

    n_qubits: 3
    max_iterations: 8
    target: {kind: lognormal, mu: 1.0, sigma: 1.0}
    train: {epochs: 300}

Every other field takes the documented default. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import ConfigInvalid, ConfigNotFound
from .proposers import LLMSettings
from .trainer import Family, Lognormal, TrainConfig, family_from_dict, family_to_dict

PROPOSERS = ("heuristic", "llm")


@dataclass
class CampaignConfig:
    n_qubits: int = 3
    n_blocks: int = 4
    max_iterations: int = 8
    seed: int = 0
    proposer: str = "heuristic"
    stateless: bool = False
    plateau_patience: int = 3
    plateau_tolerance: float = 0.01
    param_budget: Optional[int] = None
    target: Family = field(default_factory=Lognormal)
    train: TrainConfig = field(default_factory=TrainConfig)
    llm: LLMSettings = field(default_factory=LLMSettings)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def positive_int(name, minimum=1):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
                raise ConfigInvalid(name, f"must be an integer >= {minimum}, got {value!r}")

        positive_int("n_qubits")
        if self.n_qubits > 10:
            raise ConfigInvalid("n_qubits", "campaigns are limited to 10 qubits")
        positive_int("n_blocks")
        positive_int("max_iterations")
        positive_int("plateau_patience", 0)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigInvalid("seed", "must be a nonnegative integer")
        if self.proposer not in PROPOSERS:
            raise ConfigInvalid("proposer", f"must be one of {PROPOSERS}, got {self.proposer!r}")
        if not isinstance(self.stateless, bool):
            raise ConfigInvalid("stateless", "must be true or false")
        if not 0 <= self.plateau_tolerance < 1:
            raise ConfigInvalid("plateau_tolerance", "must lie in [0, 1)")
        if self.param_budget is not None and (not isinstance(self.param_budget, int) or self.param_budget < 0):
            raise ConfigInvalid("param_budget", "must be a nonnegative integer or null")
        self.train.validate()

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["target"] = family_to_dict(self.target)
        d["train"] = self.train.to_dict()
        d["llm"] = dataclasses.asdict(self.llm)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        if not isinstance(d, dict):
            raise ConfigInvalid("<root>", "config must be a mapping")
        d = dict(d)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigInvalid(unknown[0], "unknown key")
        if "target" in d:
            try:
                d["target"] = family_from_dict(d["target"])
            except (TypeError, ValueError, KeyError) as exc:
                raise ConfigInvalid("target", str(exc)) from None
        d["train"] = _sub(TrainConfig, d.get("train", {}), "train")
        d["llm"] = _sub(LLMSettings, d.get("llm", {}), "llm")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigInvalid("<root>", str(exc)) from None


def _sub(klass, values, prefix):
    if not isinstance(values, dict):
        raise ConfigInvalid(prefix, "must be a mapping")
    known = {f.name for f in dataclasses.fields(klass)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigInvalid(f"{prefix}.{unknown[0]}", "unknown key")
    try:
        return klass(**values)
    except ConfigInvalid as exc:
        raise ConfigInvalid(f"{prefix}.{exc.field}", exc.reason) from None
    except TypeError as exc:
        raise ConfigInvalid(prefix, str(exc)) from None


def load_config(path) -> CampaignConfig:
    if not os.path.isfile(path):
        raise ConfigNotFound(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigInvalid("<file>", f"not valid YAML: {exc}") from None
    return CampaignConfig.from_dict(data or {})


def save_config(cfg: CampaignConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False)
