import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from mechpol.grwa import grwa_N1, grwa_N2
from mechpol.operators import _polariton_terms, build_annihilator
from mechpol.open_system import (
    MAX_LIOUVILLIAN_DIM,
    DrivenParams,
    SteadyStateError,
    UndefinedCorrelationError,
    build_driven_hamiltonian,
    build_liouvillian,
    check_density_matrix,
    g2_zero,
    resonance_predictions,
    solve_point,
    steady_state,
    trace_functional,
)
from mechpol.params import SystemParams, TruncationSpec
from mechpol.polariton import frame_from_params


def setup(**kw):
    p = SystemParams(**{"eta": 0.5, **kw})
    return p, frame_from_params(p)


def vec(rho):
    return rho.reshape(-1, order="F")


def unvec(v, n):
    return v.reshape(n, n, order="F")


def index_of(trunc, label):
    return trunc.basis().index(label)


def test_no_drive_reduces_to_polariton_hamiltonian():
    p, fr = setup(g0=0.3, lam=0.5)
    t = TruncationSpec(2, 3)
    dr = DrivenParams(-0.4, 0.0)
    H = build_driven_hamiltonian(p, fr, dr, t)
    H1, _, _ = _polariton_terms(fr, t, dr.delta_A(fr), dr.delta_B)
    assert np.allclose(H, H1, atol=1e-14)
    assert dr.delta_A(fr) - dr.delta_B == pytest.approx(fr.omega_A - fr.omega_B)


def test_resonant_drive_splits_equally():
    p, fr = setup(g0=0.0, lam=0.0, epsilon=0.02)
    t = TruncationSpec(1, 1)
    H = build_driven_hamiltonian(p, fr, DrivenParams(0.0, p.epsilon), t)
    H0 = build_driven_hamiltonian(p, fr, DrivenParams(0.0, 0.0), t)
    V = H - H0
    vac = index_of(t, (0, 0, 0))
    a = V[index_of(t, (1, 0, 0)), vac]
    b = V[index_of(t, (0, 1, 0)), vac]
    assert abs(a) == pytest.approx(0.02 / math.sqrt(2))
    assert abs(b) == pytest.approx(0.02 / math.sqrt(2))
    assert a == pytest.approx(-b)


@pytest.mark.parametrize("basis", ["fock", "displaced"])
def test_driven_hamiltonian_hermitian(basis):
    p, fr = setup(g0=0.3, lam=0.5, omega_c=10.4)
    H = build_driven_hamiltonian(p, fr, DrivenParams(0.3, 0.05), TruncationSpec(2, 4), basis=basis)
    assert abs(H - H.conj().T).max() <= 1e-14


def test_bases_share_low_spectrum():
    p, fr = setup(g0=0.3, lam=0.5, omega_c=10.4)
    t = TruncationSpec(1, 40)
    dr = DrivenParams(0.2, 0.0)
    ef = np.linalg.eigvalsh(build_driven_hamiltonian(p, fr, dr, t, basis="fock"))
    ed = np.linalg.eigvalsh(build_driven_hamiltonian(p, fr, dr, t, basis="displaced"))
    assert np.allclose(ef[:8], ed[:8], atol=1e-8)


@pytest.mark.parametrize("basis", ["fock", "displaced"])
def test_vacuum_is_dark(basis):
    p, fr = setup(g0=0.3, lam=0.5, epsilon=0.0)
    t = TruncationSpec(2, 3)
    L = build_liouvillian(p, fr, DrivenParams(0.1, 0.0), t, basis=basis)
    n = t.dim
    rho0 = np.zeros((n, n), complex)
    rho0[0, 0] = 1.0
    # in the displaced basis the vacuum of the polaritons carries no displacement
    assert abs(L @ vec(rho0)).max() <= 1e-12
    rho = steady_state(L)
    assert abs(rho - rho0).max() <= 1e-8


def test_trace_preservation(rng):
    p, fr = setup(g0=0.3, lam=0.5, n_th=0.2, gamma_m=0.01)
    t = TruncationSpec(2, 2)
    L = build_liouvillian(p, fr, DrivenParams(-0.3, 0.02), t)
    n = t.dim
    for _ in range(5):
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho = X + X.conj().T
        assert abs(trace_functional(n) @ (L @ vec(rho))) <= 1e-12


def test_amplitude_decay_rate():
    p, fr = setup(g0=0.0, lam=0.0, epsilon=0.0, kappa_a=0.08, kappa_ex=0.0, gamma_m=0.0)
    t = TruncationSpec(1, 1)
    dr = DrivenParams(0.0, 0.0)
    L = build_liouvillian(p, fr, dr, t)
    n = t.dim
    psi = np.zeros(n, complex)
    psi[index_of(t, (0, 0, 0))] = psi[index_of(t, (1, 0, 0))] = 1 / math.sqrt(2)
    rho = np.outer(psi, psi.conj())
    A = build_annihilator("first", t)
    a0 = abs(np.trace(A @ rho))
    T = 5.0
    rho_t = unvec(spla.expm_multiply(L * T, vec(rho)), n)
    assert abs(np.trace(A @ rho_t)) / a0 == pytest.approx(math.exp(-fr.kappa_A * T / 2), rel=1e-9)


def test_thermal_phonon_marginal():
    p, fr = setup(g0=0.0, lam=0.0, epsilon=0.0, n_th=0.5, gamma_m=0.01)
    t = TruncationSpec(1, 40)
    rho = steady_state(build_liouvillian(p, fr, DrivenParams(0.0, 0.0), t))
    b = build_annihilator("phonon", t)
    assert np.trace(b.conj().T @ b @ rho).real == pytest.approx(0.5, abs=1e-6)


def test_steady_state_is_density_matrix():
    p, fr = setup(g0=0.3, lam=0.5)
    t = TruncationSpec(2, 3)
    g2, pop, rho = solve_point(p, t, 0.1)
    check_density_matrix(rho)
    assert pop > 0 and np.isfinite(g2)


def test_weak_drive_population_scales_as_eps_squared():
    t = TruncationSpec(2, 3)
    p = SystemParams(g0=0.5, lam=0.5, eta=0.5, epsilon=0.01)
    # off the blockade resonances; on them the default drive already saturates
    _, n1, _ = solve_point(p, t, -0.3)
    _, n2, _ = solve_point(p.with_(epsilon=0.005), t, -0.3)
    assert n1 < 1e-2
    assert n1 / n2 == pytest.approx(4.0, rel=0.05)


def test_linear_system_is_poissonian():
    p = SystemParams(g0=0.0, lam=0.0, eta=0.5)
    t = TruncationSpec(3, 2)
    for d in (-1.0, -0.5, 0.0, 0.5):
        g2, _, _ = solve_point(p, t, d)
        assert g2 == pytest.approx(1.0, abs=0.02)


def _b_mode_state(t, probs):
    """Diagonal state with n_B distribution ``probs`` and everything else in vacuum."""
    rho = np.zeros((t.dim, t.dim))
    for nb, pr in enumerate(probs):
        rho[index_of(t, (0, nb, 0)), index_of(t, (0, nb, 0))] = pr
    return rho


def test_g2_coherent():
    t = TruncationSpec(8, 1)
    alpha = 0.05
    c = np.array([alpha**k / math.sqrt(math.factorial(k)) for k in range(9)]) * math.exp(-alpha**2 / 2)
    psi = np.zeros(t.dim)
    for k in range(9):
        psi[index_of(t, (0, k, 0))] = c[k]
    psi /= np.linalg.norm(psi)
    assert g2_zero(np.outer(psi, psi), t) == pytest.approx(1.0, abs=1e-8)


def test_g2_fock_and_thermal():
    t = TruncationSpec(8, 1)
    assert g2_zero(_b_mode_state(t, [0, 1]), t) == 0.0
    nbar = 0.05
    r = nbar / (1 + nbar)
    pr = np.array([r**k for k in range(9)])
    assert g2_zero(_b_mode_state(t, pr / pr.sum()), t) == pytest.approx(2.0, abs=1e-6)


def test_g2_undefined_without_population():
    t = TruncationSpec(2, 1)
    with pytest.raises(UndefinedCorrelationError):
        g2_zero(_b_mode_state(t, [1.0]), t)


def test_invalid_density_matrix():
    t = TruncationSpec(1, 1)
    with pytest.raises(SteadyStateError):
        check_density_matrix(2 * _b_mode_state(t, [1.0]))


def test_dimension_cap():
    p, fr = setup()
    n = int(math.isqrt(MAX_LIOUVILLIAN_DIM)) + 1
    t = TruncationSpec(2, n // 9 + 1)
    with pytest.raises(ValueError):
        build_liouvillian(p, fr, DrivenParams(0.0, 0.01), t)


def test_unknown_basis():
    p, fr = setup()
    with pytest.raises(ValueError):
        build_driven_hamiltonian(p, fr, DrivenParams(0.0, 0.01), TruncationSpec(1, 1), basis="coherent")


def test_balanced_resonances():
    p, fr = setup(g0=0.5, lam=0.5)
    pred = resonance_predictions(p, fr, grwa_N1(p, fr, 3), grwa_N2(p, fr, 3))
    by = {r.label: r.delta_B for r in pred}
    for n in range(4):
        assert by[f"D{n}"] == pytest.approx(0.25 - n)
        assert by[f"P{n}"] == pytest.approx(0.5 - n / 2)
        assert by[f"S{n}"] == pytest.approx(0.75 - n)


def test_unbalanced_resonances_use_grwa_energies():
    p, fr = setup(g0=0.3, lam=0.5)
    n1, n2 = grwa_N1(p, fr, 3), grwa_N2(p, fr, 3)
    pred = resonance_predictions(p, fr, n1, n2)
    e = {(x.branch, x.n_b): x.energy for x in n1}
    by = {r.label: r.delta_B for r in pred}
    assert by["D+1"] == pytest.approx(-e[("+", 1)] - fr.half_splitting)
    assert by["DG0"] == pytest.approx(-e[("G", 0)] - fr.half_splitting)


@pytest.mark.slow
def test_unbalanced_predictions_match_sweep_extrema():
    from mechpol.open_system import sweep_g2

    p, fr = setup(g0=0.3, lam=0.5)
    t = TruncationSpec(2, 5)
    pred = {r.label: r for r in resonance_predictions(p, fr, grwa_N1(p, fr, 3), grwa_N2(p, fr, 3))}
    tol = fr.kappa_B
    for label in ("DG0", "D-1", "D+1", "PG0", "P10", "P20", "P11"):
        r = pred[label]
        xs = r.delta_B + np.linspace(-0.06, 0.06, 25)
        g = np.array([q.g2 for q in sweep_g2(p, t, xs)])
        inner = range(1, len(g) - 1)
        if r.kind == "D":
            ext = [xs[i] for i in inner if g[i] < g[i - 1] and g[i] < g[i + 1] and g[i] < 1]
        else:
            ext = [xs[i] for i in inner if g[i] > g[i - 1] and g[i] > g[i + 1] and g[i] > 1]
        assert ext, f"no extremum near {label} at {r.delta_B:.3f}"
        assert min(abs(e - r.delta_B) for e in ext) <= tol, label
