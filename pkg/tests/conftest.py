import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from llmqas.config import CampaignConfig  # noqa: E402
from llmqas.trainer import TrainConfig  # noqa: E402


def tiny_config(**overrides) -> CampaignConfig:
    train = TrainConfig(epochs=2, batch_size=10, dataset_size=20, repeats=2, disc_widths=(1, 4, 1))
    values = dict(n_qubits=2, n_blocks=2, max_iterations=2, seed=0, train=train)
    values.update(overrides)
    return CampaignConfig(**values)


@pytest.fixture
def tiny():
    return tiny_config


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
