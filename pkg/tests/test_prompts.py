import re
from pathlib import Path

import pytest

from llmqas.errors import NoAnsatzList
from llmqas.prompts import FeedbackRecord, format_series, render_feedback_prompt, render_retry_prompt, render_task_prompt

GOLDEN = Path(__file__).parent / "golden"

RECORD = FeedbackRecord(
    iteration=1,
    discriminator_loss_values=[0.693147, 0.69, 0.6875],
    generator_loss_values=[0.7, 0.71, 0.705],
    entropy_values=[2.5, 1.25, 0.625],
    ks_values=[0.4, 0.3, 0.2],
    ansatz_parameter_count=12,
    ansatz_depth=7,
)


def leftover_placeholders(text):
    angle = re.findall(r"<[^<>\n]{1,40}>", text)
    braces = [m for m in re.findall(r"\{([a-z_]+)\}", text)]
    return angle + braces


class TestTaskPrompt:
    def test_golden(self):
        assert render_task_prompt(3, 4) == (GOLDEN / "task_prompt_q3_b4.txt").read_text(encoding="utf-8")

    def test_substitutions(self):
        text = render_task_prompt(3, 4)
        assert "Number of qubits: 3" in text
        assert "Default number of circuit blocks: 4" in text
        assert "improved_ansatz_list = [4,1,5,1]" in text

    @pytest.mark.parametrize("n,b", [(1, 1), (3, 4), (10, 12)])
    def test_no_placeholders_left(self, n, b):
        assert leftover_placeholders(render_task_prompt(n, b)) == []

    def test_lists_all_candidates(self):
        text = render_task_prompt(3, 4)
        for tag in range(1, 6):
            assert f"\n{tag}. " in text


class TestFeedbackPrompt:
    def test_golden(self):
        assert render_feedback_prompt(RECORD) == (GOLDEN / "feedback_prompt_d7.txt").read_text(encoding="utf-8")

    def test_literals(self):
        text = render_feedback_prompt(RECORD)
        assert "discriminator_loss_values:" in text
        assert "ansatz depth : 7" in text
        assert "ansatz parameter: 12" in text
        assert "entropy_values: [2.5, 1.25, 0.625]" in text

    def test_no_placeholders_left(self):
        assert leftover_placeholders(render_feedback_prompt(RECORD)) == []

    def test_record_round_trip(self):
        assert FeedbackRecord.from_dict(RECORD.to_dict()) == RECORD
        assert RECORD.final_kl == 0.625

    def test_series_format(self):
        assert format_series([1.0, 0.123456789, 1e-9]) == "[1, 0.123457, 1e-09]"


def test_retry_prompt_names_error_and_format():
    text = render_retry_prompt(NoAnsatzList("reply contains no list"))
    assert "reply contains no list" in text
    assert "improved_ansatz_list = [4,1,5,1]" in text
