"""Ansatz proposers: a remote chat-completions LLM and an offline heuristic.

Both take the running conversation, a list of ``{"role", "content"}``
messages, and return the reply text.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import time
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np
import requests

from .ansatz import TWO_LOCAL, AnsatzSpec, Entanglement, TwoLocalConfig, parse_proposal, render_proposal, rotations_per_qubit
from .errors import ProposalError, ProposerUnavailable
from .statevector import ROTATIONS

log = logging.getLogger(__name__)

Message = dict


class Proposer(Protocol):
    def propose(self, conversation: list[Message]) -> str: ...


# -- heuristic ---------------------------------------------------------------

_QUBITS_RE = re.compile(r"Number of qubits:\s*(\d+)")
_BLOCKS_RE = re.compile(r"Default number of circuit blocks:\s*(\d+)")
_ENTROPY_RE = re.compile(r"^entropy_values:\s*\[([^\]]*)\]", re.M)
_PARAMS_RE = re.compile(r"^ansatz parameter:\s*(\d+)", re.M)
_DEPTH_RE = re.compile(r"^ansatz depth :\s*(\d+)", re.M)
FEEDBACK_OPENING = "We trained the model using the ansatz you provided."


@dataclass
class _Evaluation:
    spec: AnsatzSpec
    final_kl: float
    params: int
    depth: int

    @property
    def key(self):
        return (self.final_kl, self.params, self.depth)


def _parse_feedback(text: str) -> Optional[tuple[float, int, int]]:
    if not text.startswith(FEEDBACK_OPENING):
        return None
    ent, par, dep = _ENTROPY_RE.search(text), _PARAMS_RE.search(text), _DEPTH_RE.search(text)
    if not (ent and par and dep):
        return None
    values = [float(v) for v in ent.group(1).split(",") if v.strip()]
    if not values:
        return None
    return values[-1], int(par.group(1)), int(dep.group(1))


class HeuristicProposer:
    """Deterministic stand-in for the LLM.

    Policy:
      * no feedback yet: alternate blocks 2 and 4 up to the default block count;
      * latest final KL not better than the previous one: mutate one random
        block of the best spec seen so far;
      * improved: keep the spec, but if its parameter count exceeds the
        budget replace its most parameter-heavy block with block 4.

    The reply is a pure function of the conversation text and ``seed``.
    """

    def __init__(self, seed: int = 0, n_blocks: Optional[int] = None, param_budget: Optional[int] = None):
        self.seed = int(seed)
        self.n_blocks = n_blocks
        self.param_budget = param_budget

    def _rng(self, conversation: list[Message]) -> np.random.Generator:
        digest = hashlib.sha256("\x1e".join(m["content"] for m in conversation).encode()).digest()
        return np.random.default_rng([self.seed, int.from_bytes(digest[:8], "little")])

    def _history(self, conversation: list[Message]) -> list[_Evaluation]:
        evaluations = []
        current: Optional[AnsatzSpec] = None
        for msg in conversation:
            if msg["role"] == "assistant":
                try:
                    current = parse_proposal(msg["content"])
                except ProposalError:
                    pass
            elif current is not None:
                metrics = _parse_feedback(msg["content"])
                if metrics is not None:
                    evaluations.append(_Evaluation(current, *metrics))
        return evaluations

    def _mutate(self, spec: AnsatzSpec, rng: np.random.Generator) -> AnsatzSpec:
        blocks = list(spec.blocks)
        configs = dict(spec.twolocal)
        pos = int(rng.integers(len(blocks)))
        choices = [t for t in range(1, 6) if t != blocks[pos]]
        blocks[pos] = int(rng.choice(choices))
        configs.pop(pos, None)
        if blocks[pos] == TWO_LOCAL:
            picked = rng.random(3) < 0.5
            picked[rng.integers(3)] = True
            rotations = tuple(r for r, keep in zip(ROTATIONS, picked) if keep)
            strategy = list(Entanglement)[int(rng.integers(len(Entanglement)))]
            configs[pos] = TwoLocalConfig(rotations, strategy)
        return AnsatzSpec(tuple(blocks), configs)

    @staticmethod
    def _trim(spec: AnsatzSpec) -> AnsatzSpec:
        weights = [rotations_per_qubit(b, spec.twolocal.get(i)) for i, b in enumerate(spec.blocks)]
        pos = int(np.argmax(weights))
        if weights[pos] == 0:
            return spec
        blocks = list(spec.blocks)
        blocks[pos] = 4
        configs = {k: v for k, v in spec.twolocal.items() if k != pos}
        return AnsatzSpec(tuple(blocks), configs)

    def next_spec(self, conversation: list[Message]) -> AnsatzSpec:
        task = conversation[0]["content"] if conversation else ""
        m_blocks, m_qubits = _BLOCKS_RE.search(task), _QUBITS_RE.search(task)
        n_blocks = self.n_blocks or (int(m_blocks.group(1)) if m_blocks else 4)
        n_qubits = int(m_qubits.group(1)) if m_qubits else 3
        budget = self.param_budget if self.param_budget is not None else n_qubits * n_blocks

        history = self._history(conversation)
        if not history:
            return AnsatzSpec(tuple(2 if i % 2 == 0 else 4 for i in range(n_blocks)))
        last = history[-1]
        improved = len(history) == 1 or last.final_kl < history[-2].final_kl
        if not improved:
            best = min(history, key=lambda e: e.key)
            return self._mutate(best.spec, self._rng(conversation))
        if last.params > budget:
            return self._trim(last.spec)
        return last.spec

    def propose(self, conversation: list[Message]) -> str:
        if not conversation:
            raise ValueError("conversation must contain at least the task prompt")
        spec = self.next_spec(conversation)
        return "Proposed ansatz for the next round:\n\n```\n" + render_proposal(spec) + "```\n"


# -- remote LLM --------------------------------------------------------------

@dataclass
class LLMSettings:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o"
    api_key_env: str = "LLMQAS_API_KEY"
    timeout: float = 120.0
    max_retries: int = 3
    backoff: float = 2.0
    temperature: Optional[float] = None


class RemoteLLM:
    """JSON-over-HTTP chat-completions client with retry and exponential backoff."""

    def __init__(self, settings: LLMSettings, session: Optional[requests.Session] = None, sleep=time.sleep):
        self.settings = settings
        self.session = session or requests.Session()
        self._sleep = sleep

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.settings.api_key_env, "").strip()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def propose(self, conversation: list[Message]) -> str:
        s = self.settings
        body = {"model": s.model, "messages": [{"role": m["role"], "content": m["content"]} for m in conversation]}
        if s.temperature is not None:
            body["temperature"] = s.temperature
        last_error = None
        for attempt in range(s.max_retries + 1):
            if attempt:
                self._sleep(s.backoff * 2 ** (attempt - 1))
            try:
                resp = self.session.post(s.endpoint, json=body, headers=self._headers(), timeout=s.timeout)
            except requests.RequestException as exc:
                last_error = exc
                log.warning("LLM request failed (attempt %d/%d): %s", attempt + 1, s.max_retries + 1, exc)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                log.warning("LLM endpoint returned %s (attempt %d/%d)", resp.status_code, attempt + 1, s.max_retries + 1)
                continue
            if resp.status_code >= 400:
                raise ProposerUnavailable(f"LLM endpoint rejected the request: HTTP {resp.status_code} {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                last_error = f"malformed response: {exc}"
                continue
        raise ProposerUnavailable(f"no usable LLM response after {s.max_retries + 1} attempts: {last_error}")
