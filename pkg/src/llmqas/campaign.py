"""The propose -> train -> feedback loop.

Each iteration sends the pending prompt (task prompt first, feedback
afterwards), parses the reply into an ansatz, trains it ``repeats`` times
and turns the median-final-KL repeat into the next feedback prompt.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import storage
from .ansatz import AnsatzSpec, build_circuit, parse_proposal
from .config import CampaignConfig
from .errors import ProposalError, ProposerUnavailable
from .prompts import FeedbackRecord, render_feedback_prompt, render_retry_prompt, render_task_prompt
from .proposers import HeuristicProposer, Proposer, RemoteLLM
from .statevector import circuit_depth, circuit_param_count
from .trainer import discretize_target, train_repeats

log = logging.getLogger(__name__)


@dataclass
class IterationRecord:
    iteration: int
    messages: list[dict]
    parse_outcome: str  # "ok", "retry" (second reply parsed) or "failed"
    parse_errors: list[str]
    spec: AnsatzSpec
    feedback: FeedbackRecord
    kl_summary: dict
    train_seed: int
    repeat_final_kls: list[float]
    median_trace: dict
    best: dict
    seconds: float = 0.0

    @property
    def final_kl(self) -> float:
        return self.feedback.final_kl

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "iteration": self.iteration,
            "messages": self.messages,
            "parse_outcome": self.parse_outcome,
            "parse_errors": self.parse_errors,
            "spec": self.spec.to_dict(),
            "feedback": self.feedback.to_dict(),
            "kl_summary": self.kl_summary,
            "train_seed": self.train_seed,
            "repeat_final_kls": self.repeat_final_kls,
            "median_trace": {k: v for k, v in self.median_trace.items() if timing or k != "seconds"},
            "best": self.best,
        }
        if timing:
            d["seconds"] = self.seconds
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "IterationRecord":
        return cls(
            iteration=d["iteration"],
            messages=d["messages"],
            parse_outcome=d["parse_outcome"],
            parse_errors=d["parse_errors"],
            spec=AnsatzSpec.from_dict(d["spec"]),
            feedback=FeedbackRecord.from_dict(d["feedback"]),
            kl_summary=d["kl_summary"],
            train_seed=d["train_seed"],
            repeat_final_kls=d["repeat_final_kls"],
            median_trace=d["median_trace"],
            best=d["best"],
            seconds=d.get("seconds", 0.0),
        )


@dataclass
class CampaignLog:
    config: CampaignConfig
    iterations: list[IterationRecord] = field(default_factory=list)
    best: Optional[dict] = None
    stop_reason: Optional[str] = None

    @property
    def conversation(self) -> list[dict]:
        return [m for rec in self.iterations for m in rec.messages]

    @property
    def best_spec(self) -> Optional[AnsatzSpec]:
        return AnsatzSpec.from_dict(self.best["spec"]) if self.best else None

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "config": self.config.to_dict(),
            "iterations": [r.to_dict(timing) for r in self.iterations],
            "best": self.best,
            "stop_reason": self.stop_reason,
        }


def best_key(entry: dict) -> tuple:
    """Selection order: final KL, then parameter count, then depth."""
    return (entry["final_kl"], entry["params"], entry["depth"])


def iteration_seed(master_seed: int, iteration: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), 7919, int(iteration)]).generate_state(1, np.uint64)[0] >> 1)


def default_spec(n_blocks: int) -> AnsatzSpec:
    return AnsatzSpec(tuple(2 if i % 2 == 0 else 4 for i in range(n_blocks)))


def make_proposer(cfg: CampaignConfig) -> Proposer:
    if cfg.proposer == "llm":
        return RemoteLLM(cfg.llm)
    return HeuristicProposer(seed=cfg.seed, n_blocks=cfg.n_blocks, param_budget=cfg.param_budget)


def plateaued(best_kls: list[float], patience: int, tolerance: float) -> bool:
    """True when the best KL improved by less than ``tolerance`` (relative) over ``patience`` iterations."""
    if patience <= 0 or len(best_kls) <= patience:
        return False
    before = best_kls[-1 - patience]
    return best_kls[-1] > (1 - tolerance) * before


class Campaign:
    def __init__(self, cfg: CampaignConfig, proposer: Optional[Proposer] = None, log_dir=None):
        self.cfg = cfg
        self.proposer = proposer or make_proposer(cfg)
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.target = discretize_target(cfg.target, cfg.n_qubits)
        self.log = CampaignLog(cfg)

    # the view sent to the proposer; the log always keeps the full history
    def _view(self, conversation: list[dict], start: int) -> list[dict]:
        if not self.cfg.stateless or start == 0:
            return list(conversation)
        return [conversation[0]] + conversation[start:]

    def _ask(self, conversation, start, prompt, pending):
        conversation.append({"role": "user", "content": prompt})
        pending.append(conversation[-1])
        try:
            reply = self.proposer.propose(self._view(conversation, start))
        except ProposerUnavailable:
            self._persist_status("proposer_unavailable", pending=pending)
            raise
        conversation.append({"role": "assistant", "content": reply})
        pending.append(conversation[-1])
        return reply

    def _persist_status(self, status: str, **extra) -> None:
        if self.log_dir is not None:
            storage.update_manifest(self.log_dir, status=status, stop_reason=self.log.stop_reason, best=self.log.best, **extra)

    def _next_prompt(self) -> str:
        if not self.log.iterations:
            return render_task_prompt(self.cfg.n_qubits, self.cfg.n_blocks)
        return render_feedback_prompt(self.log.iterations[-1].feedback)

    def step(self) -> IterationRecord:
        cfg = self.cfg
        iteration = len(self.log.iterations) + 1
        conversation = self.log.conversation
        start = len(conversation)
        messages: list[dict] = []
        errors: list[str] = []

        reply = self._ask(conversation, start, self._next_prompt(), messages)
        spec = None
        outcome = "ok"
        try:
            spec = parse_proposal(reply)
        except ProposalError as exc:
            errors.append(f"{type(exc).__name__}: {exc}")
            reply = self._ask(conversation, start, render_retry_prompt(exc), messages)
            try:
                spec = parse_proposal(reply)
                outcome = "retry"
            except ProposalError as exc2:
                errors.append(f"{type(exc2).__name__}: {exc2}")
                outcome = "failed"
                spec = self.log.best_spec or default_spec(cfg.n_blocks)
                log.warning("iteration %d: proposal unusable twice, falling back to %s", iteration, spec)

        started = time.perf_counter()
        circuit = build_circuit(spec, cfg.n_qubits)
        seed = iteration_seed(cfg.seed, iteration)
        traces, summary = train_repeats(circuit, self.target, cfg.train, seed)
        median = traces[summary.median_index]
        seconds = time.perf_counter() - started

        feedback = FeedbackRecord(
            iteration=iteration,
            discriminator_loss_values=median.discriminator_loss.tolist(),
            generator_loss_values=median.generator_loss.tolist(),
            entropy_values=median.kl_divergence.tolist(),
            ks_values=median.ks_statistic.tolist(),
            ansatz_parameter_count=circuit_param_count(circuit),
            ansatz_depth=circuit_depth(circuit),
        )
        candidate = {
            "iteration": iteration,
            "spec": spec.to_dict(),
            "final_kl": feedback.final_kl,
            "params": feedback.ansatz_parameter_count,
            "depth": feedback.ansatz_depth,
        }
        if self.log.best is None or best_key(candidate) < best_key(self.log.best):
            self.log.best = candidate

        rec = IterationRecord(
            iteration=iteration,
            messages=messages,
            parse_outcome=outcome,
            parse_errors=errors,
            spec=spec,
            feedback=feedback,
            kl_summary={"mean": summary.mean, "min": summary.min, "max": summary.max,
                        "median_repeat": summary.median_index},
            train_seed=seed,
            repeat_final_kls=[t.final_kl for t in traces],
            median_trace=median.to_dict(),
            best=dict(self.log.best),
            seconds=seconds,
        )
        self.log.iterations.append(rec)
        log.info("iteration %d: %s final KL %.4g (best %.4g)", iteration, spec, feedback.final_kl,
                 self.log.best["final_kl"])
        if self.log_dir is not None:
            storage.persist_iteration(self.log_dir, rec.to_dict(), best=self.log.best, status="running", pending=None)
        return rec

    def run(self) -> CampaignLog:
        if self.log_dir is not None:
            storage.init_log_dir(self.log_dir, self.cfg.to_dict(), self.cfg.seed)
        best_kls = [r.best["final_kl"] for r in self.log.iterations]
        while len(self.log.iterations) < self.cfg.max_iterations:
            if plateaued(best_kls, self.cfg.plateau_patience, self.cfg.plateau_tolerance):
                self.log.stop_reason = "plateau"
                break
            rec = self.step()
            best_kls.append(rec.best["final_kl"])
        else:
            self.log.stop_reason = "max_iterations"
        self._persist_status("completed")
        return self.log


def run_campaign(cfg: CampaignConfig, proposer: Optional[Proposer] = None, log_dir=None) -> CampaignLog:
    return Campaign(cfg, proposer, log_dir).run()


def load_campaign(log_dir) -> CampaignLog:
    manifest = storage.load_manifest(log_dir)
    cfg = CampaignConfig.from_dict(manifest["config"])
    records = [IterationRecord.from_dict(d) for d in storage.load_iterations(log_dir)]
    best = records[-1].best if records else None
    return CampaignLog(cfg, records, best, manifest.get("stop_reason"))


def resume_campaign(log_dir, proposer: Optional[Proposer] = None, max_iterations: Optional[int] = None) -> CampaignLog:
    """Continue an interrupted (or extend a finished) campaign from its log."""
    previous = load_campaign(log_dir)
    cfg = previous.config
    if max_iterations is not None:
        cfg.max_iterations = max_iterations
        cfg.validate()
        storage.update_manifest(log_dir, config=cfg.to_dict())
    campaign = Campaign(cfg, proposer, log_dir)
    campaign.log.iterations = previous.iterations
    campaign.log.best = previous.best
    return campaign.run()
