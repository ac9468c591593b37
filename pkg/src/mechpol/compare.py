"""GRWA versus exact block diagonalization, level by level."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exact import DEFAULT_PHONON_MAX, exact_block_spectrum
from .grwa import GrwaEigen, grwa_N1, grwa_N2
from .params import SystemParams
from .polariton import PolaritonFrame

VALIDITY_THRESHOLD = 0.05


class GrwaValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LevelPair:
    subspace_N: int
    branch: str
    n_b: int
    e_grwa: float
    e_exact: float

    @property
    def deviation(self) -> float:
        return abs(self.e_grwa - self.e_exact)


def paired_levels(
    params: SystemParams,
    frame: PolaritonFrame,
    subspace_N: int,
    n_b_max: int,
    n_phonon_max: int = DEFAULT_PHONON_MAX,
    extra: int = 3,
    warn: bool = True,
) -> list[LevelPair]:
    """Pair GRWA and exact levels by rank within the sector.

    GRWA levels are generated ``extra`` manifolds beyond ``n_b_max`` so that the
    rank pairing near the top of the requested window is not disturbed by levels
    of the next manifold; only pairs with n_b <= n_b_max are returned.
    Energies are relative to the sector baseline N (omega_A + omega_B)/2.
    """
    if subspace_N == 1:
        levels: list[GrwaEigen] = grwa_N1(params, frame, n_b_max + extra)
    elif subspace_N == 2:
        levels = grwa_N2(params, frame, n_b_max + extra)
    else:
        raise ValueError("GRWA levels exist for N = 1 and N = 2 only")
    levels = sorted(levels, key=lambda e: (e.energy, e.n_b))
    ex = exact_block_spectrum(params, frame, subspace_N, n_phonon_max).energies
    out = []
    for k, lev in enumerate(levels):
        if k >= ex.size:
            break
        if lev.n_b <= n_b_max:
            out.append(LevelPair(subspace_N, lev.branch, lev.n_b, lev.energy, float(ex[k])))
    if warn:
        worst = max((p.deviation for p in out), default=0.0)
        if worst > VALIDITY_THRESHOLD * params.omega_m:
            warnings.warn(
                f"GRWA deviates from exact diagonalization by {worst:.3g} omega_m in N={subspace_N} "
                f"(g0={params.g0}, lambda={params.lam})",
                GrwaValidityWarning,
                stacklevel=2,
            )
    return out


def max_deviation(pairs: list[LevelPair], branches: set[str] | None = None) -> float:
    sel = [p.deviation for p in pairs if branches is None or p.branch in branches]
    return float(np.max(sel)) if sel else 0.0
