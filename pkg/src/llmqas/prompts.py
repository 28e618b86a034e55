"""Task and feedback prompt rendering.

Templates live in ``templates/`` as plain text with ``{name}`` placeholders.
Only lowercase identifiers in braces are substituted, so JSON examples in
the templates pass through untouched.
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

from .ansatz import BLOCK_DESCRIPTIONS

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return resources.files(__package__).joinpath("templates", name).read_text(encoding="utf-8")


def fill(template: str, values: dict) -> str:
    def sub(m):
        key = m.group(1)
        return str(values[key]) if key in values else m.group(0)

    return _PLACEHOLDER.sub(sub, template)


def format_series(values: Sequence[float]) -> str:
    return "[" + ", ".join(f"{float(v):.6g}" for v in values) + "]"


def candidate_descriptions() -> str:
    lines = [f"{tag}. {text}" for tag, text in BLOCK_DESCRIPTIONS.items()]
    return "\n".join(lines) + "\n\n" + load_template("ansatz_code.txt").rstrip("\n")


def render_task_prompt(n_qubits: int, n_blocks: int) -> str:
    return fill(
        load_template("task_prompt.txt"),
        {
            "n_qubits": n_qubits,
            "n_blocks": n_blocks,
            "n_candidates": len(BLOCK_DESCRIPTIONS),
            "candidate_descriptions": candidate_descriptions(),
            "discriminator_code": load_template("discriminator_code.txt").rstrip("\n"),
            "loss_code": load_template("loss_code.txt").rstrip("\n"),
            "training_code": load_template("training_code.txt").rstrip("\n"),
        },
    )


@dataclass
class FeedbackRecord:
    iteration: int
    discriminator_loss_values: list[float]
    generator_loss_values: list[float]
    entropy_values: list[float]
    ks_values: list[float]
    ansatz_parameter_count: int
    ansatz_depth: int

    @property
    def final_kl(self) -> float:
        return self.entropy_values[-1]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackRecord":
        return cls(**d)


def render_feedback_prompt(rec: FeedbackRecord) -> str:
    # ks_values are logged with the record but the prompt text has no slot for them
    return fill(
        load_template("feedback_prompt.txt"),
        {
            "discriminator_loss_values": format_series(rec.discriminator_loss_values),
            "generator_loss_values": format_series(rec.generator_loss_values),
            "entropy_values": format_series(rec.entropy_values),
            "param_count": rec.ansatz_parameter_count,
            "depth": rec.ansatz_depth,
        },
    )


def render_retry_prompt(error: Exception) -> str:
    return (
        f"Your previous reply could not be used: {error}\n\n"
        "Please answer again and include the result in exactly this form:\n\n"
        "```\nimproved_ansatz_list = [4,1,5,1]\n```\n\n"
        "with one twolocal_config line for every block that uses ansatz 5.\n"
    )
