import numpy as np
import pytest

from ftcalib.simulate import generate_dataset, random_scenario


def make_data(seed, **kwargs):
    """Dataset, ground truth and scenario for a random scenario."""
    scenario = random_scenario(seed, **kwargs)
    data, truth = generate_dataset(scenario)
    return data, truth, scenario


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def clean_unknown():
    """Noise-free, random-gravity dataset (mass folded into gravity)."""
    return make_data(11, gravity_std=100.0)


@pytest.fixture
def clean_known():
    """Noise-free dataset with standard gravity and a 2.5 kg payload."""
    return make_data(5, mass=2.5)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
