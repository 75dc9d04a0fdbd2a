import math

import pytest

from formbeam.beamforming import db_to_linear, pattern_exponent_for_hpbw
from formbeam.config import GROWTH_RATE_DESK, REFERENCE_CONFIGS
from formbeam.geometry import GOLDEN_ANGLE, ArrayConfig, lsa_layout
from formbeam.montecarlo import Scenario

LAMBDA = 0.3


def make_cfg(rows=3, cols=3, spacing=LAMBDA / 2):
    return ArrayConfig(rows, cols, spacing, spacing, LAMBDA, db_to_linear(5.0),
                       pattern_exponent_for_hpbw(math.radians(70.0)))


def desk_layout(n_satellites=16):
    return lsa_layout(n_satellites, GOLDEN_ANGLE, GROWTH_RATE_DESK[n_satellites],
                      REFERENCE_CONFIGS[n_satellites][1] / 4)


@pytest.fixture
def cfg():
    return make_cfg()


@pytest.fixture(scope="session")
def desk_scenario():
    return Scenario(desk_layout(16), make_cfg())


# (number, title, verdict, detail) rows filled in by test_acceptance
ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, verdict, detail in sorted(ACCEPTANCE_LOG):
        terminalreporter.write_line(f"[{n:2d}] {verdict}  {title}  ({detail})")
