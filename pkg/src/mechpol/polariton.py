"""Hopfield transform from cavity/exciton modes to polariton modes A (upper), B (lower)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .params import SystemParams


class DegenerateFrameError(ValueError):
    """Raised when the mixing angle is undefined (eta = 0 at zero detuning)."""


class FrameValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PolaritonFrame:
    theta: float
    omega_A: float
    omega_B: float
    Q_A: float
    Q_B: float
    Q: float
    Omega: float
    G: float
    kappa_A: float
    kappa_B: float

    @property
    def phi(self) -> float:
        return 2.0 * self.theta

    @property
    def splitting(self) -> float:
        """omega_A - omega_B (equals 2 eta / sin 2theta)."""
        return self.omega_A - self.omega_B

    @property
    def half_splitting(self) -> float:
        """eta / sin 2theta: offset of the N=1 baseline above omega_B."""
        return 0.5 * self.splitting

    def beta(self, n_pol: int, m: float) -> float:
        """Phonon displacement (N*Omega + m*G) of the (j, m) polariton sector."""
        return n_pol * self.Omega + m * self.G


def mixing_angle(delta_ce: float, eta: float) -> float:
    """Mixing angle theta in [0, pi/2] with tan(2 theta) = 2 eta / delta_ce.

    ``delta_ce`` is omega_c - omega_ex; theta -> 0 (A photon-like) for large
    positive detuning and theta -> pi/2 for large negative detuning.
    """
    if eta == 0 and delta_ce == 0:
        raise DegenerateFrameError("mixing angle undefined for eta = 0 at zero detuning")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return 0.5 * math.atan2(2.0 * eta, delta_ce)


def frame_from_params(params: SystemParams) -> PolaritonFrame:
    theta = mixing_angle(params.delta_ce, params.eta)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    cs = math.cos(theta) * math.sin(theta)
    mean = 0.5 * (params.omega_c + params.omega_ex)
    # sqrt form of eta / sin(2 theta); stays finite as theta -> 0
    half = 0.5 * math.hypot(params.delta_ce, 2.0 * params.eta)
    g0, lam = params.g0, params.lam
    Q_A = g0 * c2 + lam * s2
    Q_B = g0 * s2 + lam * c2
    frame = PolaritonFrame(
        theta=theta,
        omega_A=mean + half,
        omega_B=mean - half,
        Q_A=Q_A,
        Q_B=Q_B,
        Q=(lam - g0) * cs,
        Omega=0.5 * (g0 + lam),
        G=g0 - lam,
        kappa_A=params.kappa_a * c2 + params.kappa_ex * s2,
        kappa_B=params.kappa_a * s2 + params.kappa_ex * c2,
    )
    if frame.splitting < 10.0 * max(params.kappa_a, params.kappa_ex):
        warnings.warn(
            f"polariton splitting {frame.splitting:.3g} is not large compared with the "
            f"bare decay rates; the polariton decay rates are unreliable",
            FrameValidityWarning,
            stacklevel=2,
        )
    return frame


def lowering_matrix_element(j: float, m: float) -> float:
    """<j-1/2, m+1/2| B |j, m>, i.e. sqrt(n_B) with n_B = j - m."""
    n_B = j - m
    if abs(m) > j + 1e-12 or abs(n_B - round(n_B)) > 1e-12:
        raise ValueError(f"invalid angular state j={j}, m={m}")
    return math.sqrt(max(round(n_B), 0))
