"""Physical parameters and Fock-space truncations.

Every frequency, coupling and rate is dimensionless, measured in units of the
mechanical frequency, so ``omega_m`` is pinned to 1.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field, replace


@dataclass(frozen=True)
class SystemParams:
    """Cavity, exciton and mechanical parameters (units of omega_m).

    ``lam`` is the exciton-phonon coupling (``lambda`` in config files).
    ``gamma_spec`` is the spectrometer half-bandwidth used for emission spectra.
    """

    omega_c: float = 10.0
    omega_ex: float = 10.0
    g0: float = 0.0
    lam: float = 0.5
    eta: float = 0.5
    kappa_a: float = 0.05
    kappa_ex: float = 0.05
    gamma_m: float = 0.001
    n_th: float = 0.0
    epsilon: float = 0.01
    gamma_spec: float = 0.15
    omega_m: float = field(default=1.0)

    def __post_init__(self):
        if self.omega_m != 1.0:
            raise ValueError("omega_m is the frequency unit and must equal 1")
        for name in ("kappa_a", "kappa_ex", "gamma_m", "n_th", "epsilon", "gamma_spec"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def delta_ce(self) -> float:
        """Cavity-exciton detuning omega_c - omega_ex.

        Positive detuning puts the bare cavity on the upper branch, so the
        upper polariton A tends to the photon as the detuning grows.
        """
        return self.omega_c - self.omega_ex

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TruncationSpec:
    n_pol_max: int = 2
    n_phonon_max: int = 5

    def __post_init__(self):
        if self.n_pol_max < 1 or self.n_phonon_max < 1:
            raise ValueError("truncations must be >= 1")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n_pol_max + 1, self.n_pol_max + 1, self.n_phonon_max + 1)

    @property
    def dim(self) -> int:
        d1, d2, d3 = self.dims
        return d1 * d2 * d3

    def basis(self) -> list[tuple[int, int, int]]:
        """Labels (n1, n2, n_b), row-major with the phonon index fastest."""
        return list(itertools.product(*(range(d) for d in self.dims)))
