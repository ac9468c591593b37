"""Exact diagonalization of the polariton-phonon Hamiltonian per polariton-number sector.

The total polariton number N commutes with H1, so each sector is a
(N+1)(n_phonon_max+1) dense block in the basis |j=N/2, m> (x) |n_b>, m ascending
then n_b ascending. Energies are reported relative to the sector baseline
N (omega_A + omega_B) / 2, the same reference used by the GRWA formulas.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import AngularState, m_values, rotation, spin_matrices
from .fock import PAD, displacement
from .operators import destroy
from .params import SystemParams
from .polariton import PolaritonFrame

DEFAULT_PHONON_MAX = 12


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class BlockSpectrum:
    subspace_N: int
    energies: np.ndarray
    vectors: np.ndarray
    baseline: float
    n_phonon_max: int

    def absolute_energies(self) -> np.ndarray:
        return self.energies + self.baseline


def block_basis(subspace_N: int, n_phonon_max: int) -> list[tuple[AngularState, int]]:
    if subspace_N < 0:
        raise ValueError("subspace_N must be >= 0")
    j = subspace_N / 2
    return [(AngularState(j, m), n) for m in m_values(subspace_N) for n in range(n_phonon_max + 1)]


def block_hamiltonian(
    frame: PolaritonFrame, subspace_N: int, n_phonon_max: int, representation: str = "H1",
    omega_m: float = 1.0,
) -> np.ndarray:
    """Sector block of H1, H2 (rotated by U1) or H3 (rotated and polaron-shifted).

    The baseline N (omega_A + omega_B)/2 is omitted.
    """
    Jx, _, Jz = spin_matrices(subspace_N)
    I_s = np.eye(subspace_N + 1)
    d = n_phonon_max + 1
    b = destroy(d)
    x = b + b.conj().T
    nb = np.diag(np.arange(d, dtype=float))
    N = subspace_N
    split = frame.splitting
    if representation == "H1":
        coupling = (
            frame.Omega * N * I_s
            + (frame.Q_A - frame.Q_B) * Jz
            + 2 * frame.Q * Jx
        )
        H = np.kron(split * Jz, np.eye(d)) + np.kron(I_s, omega_m * nb) + np.kron(coupling, x)
    elif representation == "H2":
        phi = frame.phi
        spin = split * (np.cos(phi) * Jz + np.sin(phi) * Jx)
        coupling = frame.Omega * N * I_s + frame.G * Jz
        H = np.kron(spin, np.eye(d)) + np.kron(I_s, omega_m * nb) + np.kron(coupling, x)
    elif representation == "H3":
        # transform in a padded phonon space, then keep the lowest d levels of each m block
        big = n_phonon_max + PAD
        H2 = block_hamiltonian(frame, subspace_N, big, "H2", omega_m)
        U2 = polaron_unitary(frame, subspace_N, big, omega_m)
        keep = np.concatenate([np.arange(k * (big + 1), k * (big + 1) + d) for k in range(subspace_N + 1)])
        H = (U2 @ H2 @ U2.conj().T)[np.ix_(keep, keep)]
    else:
        raise ValueError(f"unknown representation {representation!r}")
    return 0.5 * (H + H.conj().T)


def polaron_unitary(frame: PolaritonFrame, subspace_N: int, n_phonon_max: int, omega_m: float = 1.0):
    """U2 = exp[(Omega N + G J_z)(b^dag - b)/omega_m], block diagonal in m."""
    d = n_phonon_max + 1
    blocks = [displacement(frame.beta(subspace_N, m) / omega_m, d) for m in m_values(subspace_N)]
    U = np.zeros(((subspace_N + 1) * d,) * 2)
    for k, blk in enumerate(blocks):
        U[k * d:(k + 1) * d, k * d:(k + 1) * d] = blk
    return U


def rotation_unitary(frame: PolaritonFrame, subspace_N: int, n_phonon_max: int) -> np.ndarray:
    """U1 (x) identity on the sector block."""
    return np.kron(rotation(subspace_N, frame.phi), np.eye(n_phonon_max + 1))


def exact_block_spectrum(
    params: SystemParams,
    frame: PolaritonFrame,
    subspace_N: int,
    n_phonon_max: int = DEFAULT_PHONON_MAX,
    representation: str = "H1",
) -> BlockSpectrum:
    H = block_hamiltonian(frame, subspace_N, n_phonon_max, representation, params.omega_m)
    try:
        w, v = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh failed for N={subspace_N}: {exc}") from exc
    baseline = subspace_N * 0.5 * (frame.omega_A + frame.omega_B)
    return BlockSpectrum(subspace_N, w, v, baseline, n_phonon_max)
