"""Shared, cached long runs. Each full-length propagation takes ~10 s."""

import math
import time

import numpy as np
import pytest

from kdspin import analysis, dirac, evolution, field, perturbation
from kdspin.constants import fs_to_natural

REFERENCE_K_L = 2.54e-2
REFERENCE_XI = 4.74e-2
# the 20 fs window including both ramps
FULL_RUN_CYCLES = fs_to_natural(20.0) * REFERENCE_K_L / (2 * math.pi)


@pytest.fixture(scope="session")
def tuned_pz():
    return perturbation.tune_longitudinal_momentum(REFERENCE_K_L)


@pytest.fixture(scope="session")
def tuned_ladder(tuned_pz):
    return field.standard_kinematics(REFERENCE_K_L, tuned_pz, truncation=12)


def _timed_run(ladder, xi, spin, cycles=FULL_RUN_CYCLES, stride=16):
    cfg = field.reference_laser(REFERENCE_K_L, xi, total_cycles=cycles)
    start = time.perf_counter()
    result = evolution.propagate(
        evolution.basis_state(ladder, 0, dirac.PLUS, analysis.tilted_spinor(spin)), cfg, ladder,
        sample_stride=stride)
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def full_run_se(tuned_ladder):
    """(result, seconds) of the 20 fs run started in s_se at the reference amplitude."""
    return _timed_run(tuned_ladder, REFERENCE_XI, "se")


@pytest.fixture(scope="session")
def full_run_nw(tuned_ladder):
    return _timed_run(tuned_ladder, REFERENCE_XI, "nw")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
