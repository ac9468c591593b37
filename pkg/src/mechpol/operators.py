"""Dense operators on the truncated (n1, n2, n_b) tensor Fock basis.

Operators are plain complex ``numpy`` arrays. The basis is the one returned by
:meth:`TruncationSpec.basis`: row-major over (n1, n2, n_b) with n_b fastest.
"first"/"second" are (a, c) in the lab frame and (A, B) in the polariton frame.
"""
from __future__ import annotations

import numpy as np

from .params import SystemParams, TruncationSpec
from .polariton import PolaritonFrame

_MODE_INDEX = {"first": 0, "second": 1, "phonon": 2}


def destroy(n: int) -> np.ndarray:
    """Single-mode lowering operator on n levels."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def build_annihilator(mode: str, trunc: TruncationSpec) -> np.ndarray:
    try:
        slot = _MODE_INDEX[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(_MODE_INDEX)}") from None
    factors = [np.eye(d, dtype=complex) for d in trunc.dims]
    factors[slot] = destroy(trunc.dims[slot])
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def _mode_ops(trunc: TruncationSpec):
    o1 = build_annihilator("first", trunc)
    o2 = build_annihilator("second", trunc)
    b = build_annihilator("phonon", trunc)
    return o1, o2, b


def build_hamiltonian_lab(params: SystemParams, trunc: TruncationSpec) -> np.ndarray:
    a, c, b = _mode_ops(trunc)
    ad, cd, bd = a.conj().T, c.conj().T, b.conj().T
    x = bd + b
    na, nc = ad @ a, cd @ c
    H = (
        params.omega_c * na
        + params.omega_m * (bd @ b)
        + params.omega_ex * nc
        + params.g0 * na @ x
        + params.lam * nc @ x
        + params.eta * (ad @ c + cd @ a)
    )
    return 0.5 * (H + H.conj().T)


def _polariton_terms(frame: PolaritonFrame, trunc: TruncationSpec, omega_A, omega_B, omega_m=1.0):
    A, B, b = _mode_ops(trunc)
    Ad, Bd, bd = A.conj().T, B.conj().T, b.conj().T
    x = bd + b
    nA, nB = Ad @ A, Bd @ B
    H = (
        omega_A * nA
        + omega_B * nB
        + omega_m * (bd @ b)
        + (frame.Q_A * nA + frame.Q_B * nB) @ x
        + frame.Q * (Ad @ B + Bd @ A) @ x
    )
    return H, A, B


def build_hamiltonian_polariton(
    params: SystemParams, frame: PolaritonFrame, trunc: TruncationSpec
) -> np.ndarray:
    H, _, _ = _polariton_terms(frame, trunc, frame.omega_A, frame.omega_B, params.omega_m)
    return 0.5 * (H + H.conj().T)


def polariton_number(trunc: TruncationSpec) -> np.ndarray:
    A, B, _ = _mode_ops(trunc)
    return A.conj().T @ A + B.conj().T @ B


def sector_indices(trunc: TruncationSpec, n_pol: int) -> np.ndarray:
    """Indices of basis states with n1 + n2 == n_pol."""
    return np.array([i for i, (n1, n2, _) in enumerate(trunc.basis()) if n1 + n2 == n_pol])


def hopfield_rotation(theta: float, trunc: TruncationSpec) -> np.ndarray:
    """Unitary on the truncated space mapping lab operators into the polariton frame.

    Returns W with W^dag H_lab W equal to the polariton-frame Hamiltonian on every
    sector with n1 + n2 <= n_pol_max (the rotation conserves total excitation).
    """
    import scipy.linalg

    a, c, _ = _mode_ops(trunc)
    gen = theta * (a.conj().T @ c - c.conj().T @ a)
    return scipy.linalg.expm(gen)
