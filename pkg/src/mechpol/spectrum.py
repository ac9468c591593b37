"""Spectrometer-filtered emission spectrum of polariton mode B.

An initial single-B-polariton state |1/2,-1/2>|n0>_{1/2,-1/2} is expanded in the
GRWA eigenstates of the N = 1 sector; each eigenstate k decays to the N = 0
states |0,0>|n2> (bare Fock, no displacement), giving a Lorentzian line with

    weight = |<psi0|k>|^2 |<0,0,n2|B|k>|^2,   center = E_k - n2 omega_m.

Cross terms between distinct eigenstates are dropped. Components: S1 comes from
the ground state, S2 from the upper (+) branch, S3 from the lower (-) branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .fock import displaced_fock, overlap
from .grwa import GrwaEigen, grwa_N1
from .params import SystemParams
from .polariton import PolaritonFrame, lowering_matrix_element

WEIGHT_FLOOR = 1e-14
COMPONENT_OF_BRANCH = {"G": "S1", "+": "S2", "-": "S3"}


@dataclass(frozen=True)
class SpectrumLine:
    weight: float
    center: float
    component: str
    origin: tuple[str, int, int]  # (branch, n1, n2)


@dataclass
class SpectrumSeries:
    grid: np.ndarray
    total: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    params: dict = field(default_factory=dict)

    def component(self, name: str) -> np.ndarray:
        return {"S1": self.s1, "S2": self.s2, "S3": self.s3}[name]


@dataclass(frozen=True)
class InitialState:
    n0: int
    beta: float

    def phonon_vector(self, dim: int) -> np.ndarray:
        return displaced_fock(self.beta, self.n0, dim)


def initial_state(n0: int, frame: PolaritonFrame, n_phonon_max: int | None = None, omega_m: float = 1.0) -> InitialState:
    """|1/2,-1/2> times the Fock state n0 displaced by beta_{1/2,-1/2} = (Omega - G/2)/omega_m."""
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    if n_phonon_max is not None and n0 > n_phonon_max:
        raise ValueError(f"n0={n0} beyond phonon truncation {n_phonon_max}")
    return InitialState(n0, frame.beta(1, -0.5) / omega_m)


def _overlap_with_initial(psi0: InitialState, k: GrwaEigen) -> float:
    s = 0.0
    for (m, n, beta), c in k.lab_coefficients().items():
        if m == -0.5:
            s += c * overlap(psi0.n0, n, psi0.beta - beta)
    return s


def _emission_amplitude(k: GrwaEigen, n2: int) -> float:
    """<0,0,n2| B |k>; only the m = -1/2 (one B polariton) part contributes."""
    s = 0.0
    for (m, n, beta), c in k.lab_coefficients().items():
        if m == -0.5:
            s += c * overlap(n2, n, -beta)
    return lowering_matrix_element(0.5, -0.5) * s


def spectrum_lines(
    params: SystemParams,
    frame: PolaritonFrame,
    n0: int = 2,
    n_b_max: int = 6,
    n2_max: int | None = None,
    states: list[GrwaEigen] | None = None,
) -> list[SpectrumLine]:
    """All lines above the weight floor, sorted by center.

    ``n2_max`` (default ``n_b_max``) bounds the final phonon number.
    """
    if n2_max is None:
        n2_max = n_b_max
    if states is None:
        states = grwa_N1(params, frame, n_b_max)
    psi0 = initial_state(n0, frame, None, params.omega_m)
    base = frame.omega_B + frame.half_splitting  # (omega_A + omega_B)/2
    wm = params.omega_m
    lines = []
    for k in states:
        pk = _overlap_with_initial(psi0, k) ** 2
        if pk < WEIGHT_FLOOR:
            continue
        for n2 in range(n2_max + 1):
            w = pk * _emission_amplitude(k, n2) ** 2
            if w > WEIGHT_FLOOR:
                lines.append(
                    SpectrumLine(w, base + k.energy - n2 * wm, COMPONENT_OF_BRANCH[k.branch], (k.branch, k.n_b, n2))
                )
    lines.sort(key=lambda ln: (ln.center, ln.origin))
    return lines


def default_grid(frame: PolaritonFrame, points: int = 1201, omega_m: float = 1.0) -> np.ndarray:
    return np.linspace(frame.omega_B - 8 * omega_m, frame.omega_B + 3 * omega_m, points)


def lorentzian(x, center: float, gamma: float):
    return 2 * gamma / (gamma**2 + (np.asarray(x) - center) ** 2)


def evaluate_spectrum(lines: list[SpectrumLine], gamma_spec: float, grid, params: dict | None = None) -> SpectrumSeries:
    if not gamma_spec > 0:
        raise ValueError("gamma_spec must be > 0")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty frequency grid")
    comps = {c: np.zeros_like(grid) for c in ("S1", "S2", "S3")}
    for ln in lines:
        comps[ln.component] += ln.weight * lorentzian(grid, ln.center, gamma_spec)
    total = comps["S1"] + comps["S2"] + comps["S3"]
    return SpectrumSeries(grid, total, comps["S1"], comps["S2"], comps["S3"], dict(params or {}))


def component_weights(lines: list[SpectrumLine]) -> dict[str, float]:
    out = {"S1": 0.0, "S2": 0.0, "S3": 0.0}
    for ln in lines:
        out[ln.component] += ln.weight
    return out


def count_peaks(series: SpectrumSeries, rel_floor: float = 1e-3) -> int:
    """Local maxima of the total spectrum above ``rel_floor`` of the global max."""
    y = series.total
    top = y.max()
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > rel_floor * top)
    return int(inner.sum())


def sum_rule_reference(
    params: SystemParams, frame: PolaritonFrame, n0: int, n_b_max: int, n2_max: int | None = None,
    states: list[GrwaEigen] | None = None,
) -> float:
    """sum_k |<psi0|k>|^2 <k|B^dag B|k>, from explicit state vectors.

    The GRWA states are expanded on a truncated Fock basis; B^dag B is the B
    occupation on the projected vector, which matches final states n2 <= n2_max.
    """
    if n2_max is None:
        n2_max = n_b_max
    if states is None:
        states = grwa_N1(params, frame, n_b_max)
    big = max(n2_max, n_b_max, n0) + 40
    psi0 = initial_state(n0, frame, None, params.omega_m)
    d = big + 1
    v0 = np.zeros(2 * d)
    v0[:d] = psi0.phonon_vector(d)  # m = -1/2 block first
    nB = np.diag([1.0, 0.0])  # n_B = j - m on the (m=-1/2, m=1/2) blocks
    total = 0.0
    for k in states:
        vk = k.to_block_vector(big)
        amp = float(v0 @ vk)
        vt = k.to_block_vector(n2_max)
        occ = float(vt @ np.kron(nB, np.eye(n2_max + 1)) @ vt)
        total += amp**2 * occ
    return total


def integrated_weight(series: SpectrumSeries, lines: list[SpectrumLine], gamma_spec: float) -> float:
    """Trapezoid integral of the total spectrum with the Lorentzian tails outside the grid added back."""
    lo, hi = series.grid[0], series.grid[-1]
    integral = float(trapezoid(series.total, series.grid))
    tails = 0.0
    for ln in lines:
        # 2 gamma/(gamma^2+x^2) integrates to 2 atan(x/gamma)
        inside = 2 * (math.atan((hi - ln.center) / gamma_spec) - math.atan((lo - ln.center) / gamma_spec))
        tails += ln.weight * (2 * math.pi - inside)
    return integral + tails
