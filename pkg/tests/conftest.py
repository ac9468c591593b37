import numpy as np
import pytest

from mechpol.params import SystemParams, TruncationSpec
from mechpol.polariton import frame_from_params


@pytest.fixture
def fig2_params():
    # resonant cavity and exciton, eta = lambda = 0.5
    return SystemParams(omega_c=10.0, omega_ex=10.0, eta=0.5, lam=0.5, g0=0.3)


@pytest.fixture
def small_trunc():
    return TruncationSpec(n_pol_max=2, n_phonon_max=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def frame_of(**kw):
    p = SystemParams(**kw)
    return p, frame_from_params(p)
