import math
from dataclasses import dataclass

import numpy as np
import pytest

from coulomb_ot import Density

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    """Store and print one acceptance line."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@dataclass(frozen=True)
class RadialCase:
    name: str
    density: Density
    # Monge cost from scipy quad of 1 / (t + |g(t)|) dF1 with brentq for g
    e_ot: float
    # ball mass function in closed form
    f1: object


@dataclass(frozen=True)
class IntervalCase:
    name: str
    density: Density
    median: float


def _exp_f1(t):
    return 1.0 - (1.0 + t + 0.5 * t * t) * math.exp(-t)


def _gauss_f1(t):
    return math.erf(t / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * t * math.exp(-0.5 * t * t)


@pytest.fixture(scope="session")
def exponential_case():
    return RadialCase("exponential", Density.exponential(1.0, 3), 0.16959023792408334, _exp_f1)


@pytest.fixture(scope="session")
def gaussian_case():
    return RadialCase("gaussian", Density.gaussian(1.0, 3), 0.3140626405601252, _gauss_f1)


@pytest.fixture(scope="session", params=["exponential", "gaussian"])
def radial_case(request, exponential_case, gaussian_case):
    return {"exponential": exponential_case, "gaussian": gaussian_case}[request.param]


@pytest.fixture(scope="session")
def interval_cases():
    return [
        IntervalCase("uniform", Density.uniform(0.0, 1.0), 0.5),
        IntervalCase("gaussian", Density.gaussian(1.0, 1, -5.0, 5.0), 0.0),
        IntervalCase("linear", Density.grid([0.0, 1.0], [0.0, 2.0]), 1.0 / math.sqrt(2.0)),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
