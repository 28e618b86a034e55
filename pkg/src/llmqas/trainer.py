"""Adversarial training of a quantum generator against the MLP discriminator."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import stats

from .discriminator import CLAMP, DEFAULT_WIDTHS, INFER, TRAIN, BCEBatch, DiscriminatorNet, disc_backward, disc_forward
from .errors import ConfigInvalid, DegenerateTarget, LengthMismatch
from .generator import GeneratorModel, generator_distribution, generator_loss_and_grad
from .optim import AmsgradState, amsgrad_step
from .statevector import Circuit

KL_FLOOR = 1e-12


# -- target distributions ----------------------------------------------------

@dataclass(frozen=True)
class Lognormal:
    mu: float = 1.0
    sigma: float = 1.0
    kind: str = field(default="lognormal", init=False)


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float
    kind: str = field(default="normal", init=False)


@dataclass(frozen=True)
class Uniform:
    kind: str = field(default="uniform", init=False)


@dataclass(frozen=True)
class Custom:
    probs: tuple[float, ...]
    kind: str = field(default="custom", init=False)


Family = Union[Lognormal, Normal, Uniform, Custom]
_FAMILIES = {"lognormal": Lognormal, "normal": Normal, "uniform": Uniform, "custom": Custom}


def family_from_dict(d: dict) -> Family:
    d = dict(d)
    kind = str(d.pop("kind", "")).lower()
    if kind not in _FAMILIES:
        raise ValueError(f"unknown target family {kind!r}; choose from {sorted(_FAMILIES)}")
    if kind == "custom":
        return Custom(tuple(float(x) for x in d["probs"]))
    return _FAMILIES[kind](**{k: float(v) for k, v in d.items()})


def family_to_dict(family: Family) -> dict:
    d = asdict(family)
    if "probs" in d:
        d["probs"] = list(d["probs"])
    return d


@dataclass(frozen=True)
class TargetDistribution:
    n_qubits: int
    probs: np.ndarray
    family: Family


def discretize_target(family: Family, n_qubits: int) -> TargetDistribution:
    """Density at the integer grid points 0..2**n-1, normalised to sum 1."""
    grid = np.arange(2**n_qubits, dtype=float)
    if isinstance(family, (Lognormal, Normal)) and not family.sigma > 0:
        raise ValueError("sigma must be positive")
    if isinstance(family, Lognormal):
        mass = stats.lognorm.pdf(grid, s=family.sigma, scale=np.exp(family.mu))
    elif isinstance(family, Normal):
        mass = stats.norm.pdf(grid, loc=family.mu, scale=family.sigma)
    elif isinstance(family, Uniform):
        mass = np.ones_like(grid)
    elif isinstance(family, Custom):
        mass = np.asarray(family.probs, dtype=float)
        if mass.shape != grid.shape:
            raise LengthMismatch(f"custom target needs {grid.size} entries, got {mass.size}")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise DegenerateTarget("custom target must be finite and nonnegative")
    else:
        raise TypeError(f"unsupported family {family!r}")
    total = mass.sum()
    if not total > 0:
        raise DegenerateTarget(f"{family} puts no mass on the {grid.size}-point grid")
    return TargetDistribution(n_qubits, mass / total, family)


# -- metrics -----------------------------------------------------------------

def _floored(p) -> np.ndarray:
    p = np.maximum(np.asarray(p, dtype=float), KL_FLOOR)
    return p / p.sum()


def kl_divergence(p, q) -> float:
    """KL(p || q) after flooring both at 1e-12 and renormalising.

    Argument order follows ``scipy.stats.entropy(trained, target)``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatch(f"distributions differ in length: {p.shape} vs {q.shape}")
    p, q = _floored(p), _floored(q)
    return max(float(np.sum(p * np.log(p / q))), 0.0)


def ks_statistic(p, q) -> float:
    """Largest gap between the two cumulative distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatch(f"distributions differ in length: {p.shape} vs {q.shape}")
    return float(np.max(np.abs(np.cumsum(p) - np.cumsum(q))))


# -- training ----------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs: int = 300
    batch_size: int = 2000
    dataset_size: int = 20000
    lr_generator: float = 1e-4
    lr_discriminator: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    repeats: int = 10
    disc_steps: int = 1
    gen_steps: int = 1
    init_scale: float = float(np.pi)
    disc_widths: tuple[int, ...] = DEFAULT_WIDTHS
    dropout: float = 0.3

    def __post_init__(self):
        # YAML 1.1 reads "1e-4" as a string
        for name in ("lr_generator", "lr_discriminator", "beta1", "beta2", "eps", "init_scale", "dropout"):
            value = getattr(self, name)
            try:
                setattr(self, name, float(value))
            except (TypeError, ValueError):
                raise ConfigInvalid(name, f"must be a number, got {value!r}") from None
        self.disc_widths = tuple(int(w) for w in self.disc_widths)
        self.validate()

    def validate(self) -> None:
        positive_ints = ("epochs", "batch_size", "dataset_size", "repeats", "disc_steps", "gen_steps")
        for name in positive_ints:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigInvalid(name, f"must be a positive integer, got {value!r}")
        if self.batch_size > self.dataset_size:
            raise ConfigInvalid("batch_size", f"{self.batch_size} exceeds dataset_size {self.dataset_size}")
        for name in ("lr_generator", "lr_discriminator", "eps"):
            if not getattr(self, name) > 0:
                raise ConfigInvalid(name, "must be positive")
        for name in ("beta1", "beta2", "dropout"):
            if not 0 <= getattr(self, name) < 1:
                raise ConfigInvalid(name, "must lie in [0, 1)")
        if not self.init_scale >= 0:
            raise ConfigInvalid("init_scale", "must be nonnegative")
        if len(self.disc_widths) < 2 or self.disc_widths[0] != 1 or self.disc_widths[-1] != 1:
            raise ConfigInvalid("disc_widths", "must start and end with 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["disc_widths"] = list(self.disc_widths)
        return d


@dataclass
class TrainingTrace:
    discriminator_loss: np.ndarray
    generator_loss: np.ndarray
    kl_divergence: np.ndarray
    ks_statistic: np.ndarray
    distributions: np.ndarray
    initial_kl: float
    final_theta: np.ndarray
    initial_theta: np.ndarray
    net: dict
    seed: int
    seconds: float = field(default=0.0, compare=False)

    @property
    def final_kl(self) -> float:
        return float(self.kl_divergence[-1])

    def __eq__(self, other):
        if not isinstance(other, TrainingTrace):
            return NotImplemented
        return self.to_dict(timing=False) == other.to_dict(timing=False)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "discriminator_loss": self.discriminator_loss.tolist(),
            "generator_loss": self.generator_loss.tolist(),
            "kl_divergence": self.kl_divergence.tolist(),
            "ks_statistic": self.ks_statistic.tolist(),
            "distributions": self.distributions.tolist(),
            "initial_kl": self.initial_kl,
            "final_theta": self.final_theta.tolist(),
            "initial_theta": self.initial_theta.tolist(),
            "net": self.net,
            "seed": self.seed,
        }
        if timing:
            d["seconds"] = self.seconds
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingTrace":
        arr = lambda k: np.asarray(d[k], dtype=float)  # noqa: E731
        return cls(
            discriminator_loss=arr("discriminator_loss"),
            generator_loss=arr("generator_loss"),
            kl_divergence=arr("kl_divergence"),
            ks_statistic=arr("ks_statistic"),
            distributions=arr("distributions"),
            initial_kl=d["initial_kl"],
            final_theta=arr("final_theta"),
            initial_theta=arr("initial_theta"),
            net=d["net"],
            seed=d["seed"],
            seconds=d.get("seconds", 0.0),
        )


def grid_inputs(n_qubits: int) -> np.ndarray:
    """Sample values k / (2**n - 1) fed to the discriminator."""
    return np.arange(2**n_qubits) / (2**n_qubits - 1)


def init_models(circuit: Circuit, cfg: TrainConfig, seed) -> tuple[GeneratorModel, DiscriminatorNet]:
    rng = np.random.default_rng(seed)
    gen = GeneratorModel.initialize(circuit, rng, cfg.init_scale)
    net = DiscriminatorNet.create(rng, cfg.disc_widths, dropout=cfg.dropout)
    return gen, net


def train(gen: GeneratorModel, net: DiscriminatorNet, target: TargetDistribution, cfg: TrainConfig, seed) -> TrainingTrace:
    """Alternate one discriminator and one generator AMSGRAD step per batch.

    The fake side of every discriminator batch is the whole grid weighted by
    the exact generator distribution. ``gen`` and ``net`` are updated in place.
    """
    if gen.n_qubits != target.n_qubits:
        raise ValueError("generator and target act on different qubit counts")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    n_bins = 2**gen.n_qubits
    grid = grid_inputs(gen.n_qubits)
    dataset = rng.choice(n_bins, size=cfg.dataset_size, p=target.probs)

    gen_state = AmsgradState(beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    disc_state = AmsgradState(beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    initial_theta = gen.theta.copy()
    initial_kl = kl_divergence(generator_distribution(gen), target.probs)

    d_hist, g_hist, kl_hist, ks_hist, dists = [], [], [], [], []
    fake_labels = np.zeros(n_bins)
    for _ in range(cfg.epochs):
        order = rng.permutation(cfg.dataset_size)
        d_losses, g_losses = [], []
        for lo in range(0, cfg.dataset_size, cfg.batch_size):
            real = grid[dataset[order[lo:lo + cfg.batch_size]]]
            for _ in range(cfg.disc_steps):
                p_gen = generator_distribution(gen)
                batch = BCEBatch(
                    inputs=np.concatenate([real, grid]),
                    labels=np.concatenate([np.ones(len(real)), fake_labels]),
                    weights=np.concatenate([np.full(len(real), 1.0 / len(real)), p_gen]),
                )
                net.mode = TRAIN
                loss, grads = disc_backward(net, batch, int(rng.integers(2**63)), update_running_stats=True)
                net.params, disc_state = amsgrad_step(disc_state, net.params, grads, cfg.lr_discriminator)
                d_losses.append(loss)
            net.mode = INFER
            for _ in range(cfg.gen_steps):
                d_out = np.clip(disc_forward(net, grid, mode=INFER), CLAMP, 1 - CLAMP)
                g_loss, g_grad = generator_loss_and_grad(gen, d_out)
                gen.theta, gen_state = amsgrad_step(gen_state, gen.theta, g_grad, cfg.lr_generator)
                g_losses.append(g_loss)
        p_gen = generator_distribution(gen)
        d_hist.append(np.mean(d_losses))
        g_hist.append(np.mean(g_losses))
        kl_hist.append(kl_divergence(p_gen, target.probs))
        ks_hist.append(ks_statistic(p_gen, target.probs))
        dists.append(p_gen)

    return TrainingTrace(
        discriminator_loss=np.asarray(d_hist),
        generator_loss=np.asarray(g_hist),
        kl_divergence=np.asarray(kl_hist),
        ks_statistic=np.asarray(ks_hist),
        distributions=np.asarray(dists),
        initial_kl=initial_kl,
        final_theta=gen.theta.copy(),
        initial_theta=initial_theta,
        net=net.to_dict(),
        seed=int(seed),
        seconds=time.perf_counter() - start,
    )


def repeat_seed(master_seed: int, repeat: int) -> int:
    """Per-repeat seed mixed from the master seed."""
    return int(np.random.SeedSequence([int(master_seed), int(repeat)]).generate_state(1, np.uint64)[0] >> 1)


@dataclass
class RepeatSummary:
    mean: float
    min: float
    max: float
    median_index: int


def train_repeats(
    circuit: Circuit, target: TargetDistribution, cfg: TrainConfig, master_seed: int, repeats: Optional[int] = None
) -> tuple[list[TrainingTrace], RepeatSummary]:
    """Independent runs from freshly initialised models; summary over final KL."""
    repeats = cfg.repeats if repeats is None else repeats
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    traces = []
    for r in range(repeats):
        seed = repeat_seed(master_seed, r)
        gen, net = init_models(circuit, cfg, seed)
        traces.append(train(gen, net, target, cfg, seed))
    finals = np.array([t.final_kl for t in traces])
    # lower median for even counts keeps the pick an actual run
    median_index = int(np.argsort(finals, kind="stable")[(repeats - 1) // 2])
    return traces, RepeatSummary(float(finals.mean()), float(finals.min()), float(finals.max()), median_index)

