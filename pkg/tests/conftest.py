import time
from dataclasses import dataclass

import numpy as np
import pytest

from adaquant.estimator import AdaConfig
from adaquant.geometry import BoxDomain
from adaquant.noise import GaussianNoise
from adaquant.quantizer import QuantizerSpec
from adaquant.simulation import ScenarioSpec, TrajectoryMetrics, run_sweep

PE_THETA = np.array([0.8, -0.6])
PE_SEEDS = range(10)
PE_STEPS = 100_000


@dataclass
class SweepResult:
    runs: list[TrajectoryMetrics]
    elapsed: float


@pytest.fixture(scope="session")
def pe_sweep() -> SweepResult:
    """Ten seeds of the persistently exciting two-parameter, three-level scenario."""
    scenario = ScenarioSpec("iid_uniform", 2, PE_STEPS, PE_THETA)
    config = AdaConfig(GaussianNoise(sigma=1.0), BoxDomain.cube(2))
    start = time.perf_counter()
    runs = run_sweep(scenario, PE_SEEDS, QuantizerSpec([-1.0, 1.0]), config)
    return SweepResult(runs, time.perf_counter() - start)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
