"""Schwinger angular-momentum states of the two polariton modes.

|j, m> = |n_A = j + m, n_B = j - m>; sector matrices are ordered by ascending m.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class AngularState:
    j: float
    m: float

    def __post_init__(self):
        if abs(self.m) > self.j + 1e-12 or abs((self.j + self.m) - round(self.j + self.m)) > 1e-12:
            raise ValueError(f"invalid angular state j={self.j}, m={self.m}")

    @property
    def n_A(self) -> int:
        return round(self.j + self.m)

    @property
    def n_B(self) -> int:
        return round(self.j - self.m)

    @property
    def index(self) -> int:
        """Position in the ascending-m sector ordering."""
        return round(self.m + self.j)


def m_values(n_pol: int) -> list[float]:
    j = n_pol / 2
    return [-j + k for k in range(n_pol + 1)]


@lru_cache(maxsize=None)
def spin_matrices(n_pol: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(J_x, J_y, J_z) on the N = n_pol sector, ascending-m ordering."""
    j = n_pol / 2
    ms = np.array(m_values(n_pol))
    Jp = np.zeros((n_pol + 1, n_pol + 1), dtype=complex)
    for k in range(n_pol):
        m = ms[k]
        Jp[k + 1, k] = np.sqrt(j * (j + 1) - m * (m + 1))
    Jm = Jp.conj().T
    return (Jp + Jm) / 2, (Jp - Jm) / 2j, np.diag(ms).astype(complex)


def rotation(n_pol: int, phi: float) -> np.ndarray:
    """U1 = exp(-i phi J_y) on the N = n_pol sector (real matrix)."""
    _, Jy, _ = spin_matrices(n_pol)
    return scipy.linalg.expm(-1j * phi * Jy).real
