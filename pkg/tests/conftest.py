import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from minmax_mom.losses import LossSpec

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ALL_LOSSES = [
    LossSpec.logistic(),
    LossSpec.hinge(),
    LossSpec.huber(1.0),
    LossSpec.huber(0.3),
    LossSpec.quantile(0.3),
    LossSpec.quantile(0.5),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def loss_id(loss):
    extra = loss.delta if loss.delta is not None else loss.tau
    return loss.family.value if extra is None else f"{loss.family.value}-{extra}"


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def report(number, passed, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"))
        print(ACCEPTANCE_LINES[-1][1])
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
