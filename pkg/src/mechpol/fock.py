"""Displaced Fock states, Laguerre polynomials and Franck-Condon factors.

Displacement convention: ``displacement(beta)`` is exp(beta (b^dag - b)). A
polariton-displaced Fock state |n>_{j,m} is exp(-beta_{j,m} (b^dag - b)) |n>,
i.e. ``displacement(-beta_jm) @ e_n``.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.linalg

# extra levels used when exponentiating the truncated displacement generator
PAD = 40


def laguerre(n: int, alpha: int, x: float) -> float:
    """Generalized Laguerre polynomial L_n^alpha(x) by the explicit finite sum."""
    if n < 0:
        raise ValueError("n must be >= 0")
    total = 0.0
    for k in range(n + 1):
        total += (-1) ** k * math.comb(n + alpha, n - k) * x**k / math.factorial(k)
    return total


def laguerre_recurrence(n: int, alpha: int, x: float) -> float:
    """Same polynomial via the three-term recurrence (used as a cross-check)."""
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def franck_condon_G0(n_b: int, g: float) -> float:
    """<n|exp(g (b^dag - b))|n> = exp(-g^2/2) L_n(g^2); g = G/omega_m."""
    if n_b < 0:
        raise ValueError("n_b must be >= 0")
    return math.exp(-0.5 * g * g) * laguerre(n_b, 0, g * g)


def franck_condon_R(n_b: int, g: float) -> float:
    """Single-phonon factor <n_b|exp(g (b^dag - b))|n_b - 1>."""
    if n_b < 1:
        raise ValueError("R is defined for n_b >= 1 only")
    return g * math.exp(-0.5 * g * g) * laguerre(n_b - 1, 1, g * g) / math.sqrt(n_b)


def displacement_element(m: int, n: int, alpha: float) -> float:
    """Closed form <m|exp(alpha (b^dag - b))|n> for real alpha."""
    if m >= n:
        k = m - n
        pre = math.sqrt(math.factorial(n) / math.factorial(m)) * alpha**k
        return pre * math.exp(-0.5 * alpha * alpha) * laguerre(n, k, alpha * alpha)
    return (-1) ** (n - m) * displacement_element(n, m, alpha)


@lru_cache(maxsize=512)
def _displacement_cached(beta: float, dim: int) -> np.ndarray:
    big = dim + PAD
    b = np.diag(np.sqrt(np.arange(1, big, dtype=float)), 1)
    D = scipy.linalg.expm(beta * (b.T - b))
    out = D[:dim, :dim].copy()
    out.setflags(write=False)
    return out


def displacement(beta: float, dim: int) -> np.ndarray:
    """Real matrix of exp(beta (b^dag - b)) restricted to the lowest ``dim`` levels.

    Exponentiated in a padded space so the kept block is converged.
    """
    return _displacement_cached(float(beta), int(dim))


def overlap(m: int, n: int, delta: float) -> float:
    """<m|exp(delta (b^dag - b))|n> via the padded matrix exponential."""
    return float(displacement(delta, max(m, n) + 1)[m, n])


def displaced_fock(beta: float, n: int, dim: int) -> np.ndarray:
    """Vector of |n>_beta = exp(-beta (b^dag - b))|n> in a ``dim``-level space."""
    if n >= dim + PAD:
        raise ValueError("Fock index beyond padded truncation")
    big = max(dim, n + 1)
    return np.asarray(displacement(-beta, big)[:dim, n])
