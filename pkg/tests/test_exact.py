import numpy as np
import pytest

from mechpol.exact import block_basis, block_hamiltonian, exact_block_spectrum, polaron_unitary
from mechpol.params import SystemParams
from mechpol.polariton import frame_from_params


def test_block_sizes():
    assert len(block_basis(0, 2)) == 3
    assert len(block_basis(1, 6)) == 14
    assert len(block_basis(2, 6)) == 21


@pytest.mark.parametrize("g0,lam", [(0.0, 0.0), (0.3, 0.5), (0.9, 0.1)])
def test_vacuum_sector(g0, lam):
    p = SystemParams(g0=g0, lam=lam)
    ex = exact_block_spectrum(p, frame_from_params(p), 0, 8)
    assert np.allclose(ex.energies, np.arange(9), atol=1e-10)


def test_balanced_degeneracy():
    g0 = 0.4
    p = SystemParams(eta=0.5, g0=g0, lam=g0)
    ex = exact_block_spectrum(p, frame_from_params(p), 1, 40)
    # the lowest level is the n_b = 0 ground, then degenerate pairs
    assert ex.energies[0] == pytest.approx(-0.5 - g0**2, abs=1e-9)
    for n in range(1, 5):
        pair = ex.energies[2 * n - 1:2 * n + 1]
        assert pair == pytest.approx([n - 0.5 - g0**2] * 2, abs=1e-9)


@pytest.mark.parametrize("N", [1, 2])
def test_polaron_invariance(rng, N):
    for _ in range(3):
        g0, lam = rng.uniform(0, 0.6, size=2)
        p = SystemParams(eta=0.5, g0=g0, lam=lam, omega_c=10 + rng.uniform(-1, 1))
        fr = frame_from_params(p)
        e2 = exact_block_spectrum(p, fr, N, 40, "H2").energies
        e3 = exact_block_spectrum(p, fr, N, 40, "H3").energies
        e1 = exact_block_spectrum(p, fr, N, 40, "H1").energies
        k = 10
        assert np.allclose(e2[:k], e3[:k], atol=1e-9)
        assert np.allclose(e1[:k], e2[:k], atol=1e-9)


def test_polaron_unitary_is_orthogonal():
    p = SystemParams(g0=0.3, lam=0.5)
    U = polaron_unitary(frame_from_params(p), 2, 30)
    k = 3 * 31
    assert abs(U.T @ U - np.eye(k))[:8, :8].max() < 1e-9


@pytest.mark.parametrize("N", [0, 1, 2])
def test_residuals_and_orthonormality(N):
    p = SystemParams(g0=0.3, lam=0.5)
    fr = frame_from_params(p)
    H = block_hamiltonian(fr, N, 10)
    ex = exact_block_spectrum(p, fr, N, 10)
    V, E = ex.vectors, ex.energies
    assert abs(H @ V - V * E).max() <= 1e-9 * np.abs(H).max()
    assert abs(V.conj().T @ V - np.eye(len(E))).max() <= 1e-10
    assert ex.baseline == pytest.approx(N * 10.0)
