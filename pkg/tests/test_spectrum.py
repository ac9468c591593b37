import numpy as np
import pytest

from mechpol.params import SystemParams
from mechpol.polariton import frame_from_params
from mechpol.spectrum import (
    SpectrumLine,
    component_weights,
    count_peaks,
    default_grid,
    evaluate_spectrum,
    initial_state,
    integrated_weight,
    spectrum_lines,
    sum_rule_reference,
)
from mechpol.grwa import grwa_N1


def setup(**kw):
    p = SystemParams(**{"eta": 0.5, "gamma_spec": 0.15, **kw})
    return p, frame_from_params(p)


def test_initial_state_trivial():
    p, fr = setup(g0=0.0, lam=0.0)
    s = initial_state(0, fr)
    assert s.n0 == 0 and s.beta == 0.0
    v = s.phonon_vector(10)
    assert np.allclose(v, np.eye(10)[0])


@pytest.mark.parametrize("n0", [0, 1, 2, 4])
def test_initial_state_norm(n0):
    p, fr = setup(g0=0.3, lam=0.5)
    v = initial_state(n0, fr).phonon_vector(60)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-10)


def test_n0_two_kills_S1():
    for g0, lam in [(0.3, 0.5), (0.0, 0.5), (0.8, 0.0)]:
        p, fr = setup(g0=g0, lam=lam)
        w = component_weights(spectrum_lines(p, fr, n0=2))
        assert w["S1"] < 1e-12


def test_single_line_uncoupled():
    p, fr = setup(g0=0.0, lam=0.0)
    lines = spectrum_lines(p, fr, n0=2)
    top = max(lines, key=lambda ln: ln.weight)
    assert top.center == pytest.approx(fr.omega_B, abs=1e-12)
    assert sum(ln.weight for ln in lines if ln is not top) < 1e-10 * top.weight


def test_lattice_spacing_without_exciton_coupling():
    p, fr = setup(g0=0.5, lam=0.0)
    lines = spectrum_lines(p, fr, n0=2)
    groups = {}
    for ln in lines:
        br, n1, n2 = ln.origin
        groups.setdefault((br, n1), []).append(ln.center + n2)
    assert len(groups) > 1
    for tops in groups.values():
        # every sideband of one emitting level shares the same upper energy
        assert max(tops) - min(tops) <= 1e-10


def test_lorentzian_single_line():
    gam = 0.15
    grid = np.linspace(-3, 3, 60001)
    s = evaluate_spectrum([SpectrumLine(0.7, 0.0, "S2", ("+", 1, 0))], gam, grid)
    assert s.total.max() == pytest.approx(2 * 0.7 / gam, rel=1e-9)
    above = grid[s.total >= s.total.max() / 2]
    assert above[-1] - above[0] == pytest.approx(2 * gam, abs=2e-4)


def test_series_invariants():
    p, fr = setup(g0=0.3, lam=0.5)
    lines = spectrum_lines(p, fr)
    s = evaluate_spectrum(lines, p.gamma_spec, default_grid(fr))
    assert np.allclose(s.total, s.s1 + s.s2 + s.s3, atol=1e-12)
    assert (s.total >= 0).all()
    assert all(ln.weight >= 0 for ln in lines)


def test_sum_rule_single_draw():
    p, fr = setup(g0=0.3, lam=0.5)
    lines = spectrum_lines(p, fr, n0=2, n_b_max=6)
    assert sum(ln.weight for ln in lines) == pytest.approx(sum_rule_reference(p, fr, 2, 6), abs=1e-6)


def test_integrated_weight_recovers_line_weights():
    p, fr = setup(g0=0.3, lam=0.5)
    lines = spectrum_lines(p, fr)
    s = evaluate_spectrum(lines, p.gamma_spec, default_grid(fr, points=4001))
    total = sum(ln.weight for ln in lines)
    assert integrated_weight(s, lines, p.gamma_spec) == pytest.approx(2 * np.pi * total, rel=1e-4)


def _sideband_orders(g0, n_b_max=6):
    p, fr = setup(g0=g0, lam=0.0)
    lines = spectrum_lines(p, fr, n0=2, n_b_max=n_b_max)
    top = max(ln.weight for ln in lines)
    return {ln.origin[2] for ln in lines if ln.weight > 0.01 * top}


def test_sidebands_grow_with_g0():
    counts = [len(_sideband_orders(g0)) for g0 in (0.0, 0.3, 0.5, 0.8)]
    assert counts[0] == 1
    assert counts == sorted(counts)
    # bounded by the phonon truncation
    assert counts[-1] <= 7


def test_exciton_coupling_spectrum_sidebands():
    p, fr = setup(g0=0.0, lam=0.5)
    lines = spectrum_lines(p, fr, n0=2)
    top = max(ln.weight for ln in lines)
    assert sum(ln.weight > 0.01 * top for ln in lines) >= 3


def test_exciton_coupling_spectrum_dominated_by_S2():
    p, fr = setup(g0=0.0, lam=0.5)
    w = component_weights(spectrum_lines(p, fr, n0=2))
    assert w["S2"] > w["S3"]


def test_evaluate_rejects_bad_input():
    with pytest.raises(ValueError):
        evaluate_spectrum([], 0.0, [0.0])
    with pytest.raises(ValueError):
        evaluate_spectrum([], 0.1, [])


def test_states_argument_reused():
    p, fr = setup(g0=0.3, lam=0.5)
    st = grwa_N1(p, fr, 6)
    a = spectrum_lines(p, fr, states=st)
    b = spectrum_lines(p, fr)
    assert [ln.weight for ln in a] == [ln.weight for ln in b]
