import logging
import math
import os

import hypothesis
import numpy as np
import pytest

from atoms import phaseonium, thermal_atoms
from main import main
from micromaser import EngineParams

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def short_tau_engine():
    """Reduced units: nu = r = tau = 1, lambda tau = 0.045, lossless."""
    return EngineParams(nu=1.0, q_factor=math.inf, lamb=0.045, tau=1.0, rate=1.0, n_max=60, tail_tol=1e-4)


@pytest.fixture
def microwave_engine():
    """Microwave-scale cavity; mu = 1012.5 /s."""
    return EngineParams(nu=1e10, q_factor=math.inf, lamb=1e5, tau=4.5e-7, rate=1e6)


@pytest.fixture
def absorbing_prep():
    return phaseonium(0.3, math.sqrt(0.35), math.sqrt(0.35), 0.0)


@pytest.fixture
def hot_thermal():
    return thermal_atoms(400.0, 1e10)


@pytest.fixture
def cold_thermal():
    return thermal_atoms(300.0, 1e10)


@pytest.fixture
def run_cli(capsys):
    """Run main(argv) and return (exit code, stdout, stderr)."""

    def _run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    yield _run
    # main() installs stream handlers bound to the captured stderr
    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)
        handler.close()
