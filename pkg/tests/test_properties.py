import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from mechpol.exact import exact_block_spectrum
from mechpol.fock import displacement_element, laguerre, laguerre_recurrence, overlap
from mechpol.grwa import grwa_N1, tridiag3_eigvalsh
from mechpol.params import SystemParams
from mechpol.polariton import frame_from_params
from mechpol.spectrum import spectrum_lines, sum_rule_reference

coupling = st.floats(0.0, 0.9, allow_nan=False)
detuning = st.floats(-2.0, 2.0, allow_nan=False)
# LAPACK eigvalsh itself loses accuracy when squares of entries underflow, so
# entries below 1e-100 are flushed to zero for the cubic comparison
small = st.floats(-3.0, 3.0, allow_nan=False).map(lambda v: 0.0 if abs(v) < 1e-100 else v)


@settings(max_examples=60, deadline=None)
@given(coupling, coupling, detuning, st.floats(0.2, 1.0))
def test_frame_identities(g0, lam, dce, eta):
    fr = frame_from_params(SystemParams(g0=g0, lam=lam, omega_c=10 + dce, eta=eta))
    assert math.isclose(fr.Q_A + fr.Q_B, g0 + lam, abs_tol=1e-12)
    assert math.isclose(fr.Q_A * fr.Q_B - fr.Q**2, g0 * lam, abs_tol=1e-12)
    assert 0.0 <= fr.theta <= math.pi / 2
    assert fr.omega_A > fr.omega_B


@settings(max_examples=200, deadline=None)
@given(small, small, small, small, small)
def test_cubic_matches_eigvalsh(a, b, c, x, y):
    T = np.diag([a, b, c]) + np.diag([x, y], 1) + np.diag([x, y], -1)
    got = tridiag3_eigvalsh((a, b, c), x, y)
    assert np.abs(got - np.linalg.eigvalsh(T)).max() <= 1e-9


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 8), st.integers(0, 3), st.floats(0.0, 4.0))
def test_laguerre_forms_agree(n, a, x):
    ref = laguerre(n, a, x)
    assert math.isclose(laguerre_recurrence(n, a, x), ref, rel_tol=1e-10, abs_tol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6), st.floats(-1.5, 1.5))
def test_overlap_closed_form(m, n, d):
    assert math.isclose(overlap(m, n, d), displacement_element(m, n, d), abs_tol=1e-10)


@settings(max_examples=15, deadline=None)
@given(coupling, coupling)
def test_vacuum_sector_energies(g0, lam):
    p = SystemParams(g0=g0, lam=lam)
    e = exact_block_spectrum(p, frame_from_params(p), 0, 6).energies
    assert np.abs(e - np.arange(7)).max() <= 1e-10


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 0.6), st.floats(0.0, 0.6), st.floats(-0.5, 0.5), st.integers(0, 3))
def test_spectral_sum_rule(g0, lam, dce, n0):
    p = SystemParams(g0=g0, lam=lam, omega_c=10 + dce, eta=0.5)
    fr = frame_from_params(p)
    st_ = grwa_N1(p, fr, 6)
    lines = spectrum_lines(p, fr, n0, 6, states=st_)
    ref = sum_rule_reference(p, fr, n0, 6, states=st_)
    assert abs(sum(ln.weight for ln in lines) - ref) <= 1e-6
