import numpy as np
import pytest

from maflex.geometry import ArrayLimits, PolarTarget
from maflex.harness.config import ScenarioConfig

LAM = 0.06


@pytest.fixture
def lam():
    return LAM


@pytest.fixture
def limits():
    return ArrayLimits(9 * LAM, LAM / 2, LAM)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def null_three_config(**kw):
    return ScenarioConfig.build(
        target0=PolarTarget(4.72, 1.01),
        users=[PolarTarget(6.32, 1.89), PolarTarget(5.0, 1.57), PolarTarget(5.0, 0.93)],
        **kw,
    )


def beam_three_config(**kw):
    return ScenarioConfig.build(
        scenario="multibeam",
        target0=PolarTarget(6.10, 2.18),
        users=[PolarTarget(6.0, 1.57), PolarTarget(5.0, 0.93)],
        **kw,
    )


def error_null_config(**kw):
    return ScenarioConfig.build(
        target0=PolarTarget(5.0, 0.93),
        users=[PolarTarget(5.0, 2.21), PolarTarget(6.08, 1.74), PolarTarget(4.47, 0.46)],
        **kw,
    )


def error_beam_config(**kw):
    return ScenarioConfig.build(
        scenario="multibeam",
        target0=PolarTarget(8.94, 2.03),
        users=[PolarTarget(7.61, 1.16)],
        **kw,
    )


ACCEPTANCE_LINES = []


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
