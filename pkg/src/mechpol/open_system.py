"""Driven-dissipative polariton-phonon dynamics and equal-time correlations.

The master equation d rho/dt = i[rho, H'] + L_diss rho is vectorized column-wise
(vec(X Y Z) = (Z^T kron X) vec(Y)) on the truncated |n_A> |n_B> |n_b> space.
Superoperators are sparse internally; the dense form is available on request.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import displacement
from .grwa import GrwaEigen
from .operators import build_annihilator
from .params import SystemParams, TruncationSpec
from .polariton import PolaritonFrame, frame_from_params

MAX_LIOUVILLIAN_DIM = 200_000
POPULATION_FLOOR = 1e-12


class SteadyStateError(RuntimeError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


@dataclass(frozen=True)
class DrivenParams:
    """Drive detuning delta_B = omega_B - omega_d and amplitude epsilon."""

    delta_B: float
    epsilon: float

    def delta_A(self, frame: PolaritonFrame) -> float:
        return self.delta_B + frame.splitting


@dataclass(frozen=True)
class ResonancePrediction:
    kind: str  # "D", "P" or "S"
    label: str
    delta_B: float
    origin: str
    final: str


BASES = ("fock", "displaced")


def _ops(trunc: TruncationSpec):
    A = sp.csr_matrix(build_annihilator("first", trunc))
    B = sp.csr_matrix(build_annihilator("second", trunc))
    b = sp.csr_matrix(build_annihilator("phonon", trunc))
    return A, B, b


def _phonon_factor(trunc: TruncationSpec, mat: np.ndarray) -> sp.csr_matrix:
    d1, d2, _ = trunc.dims
    return sp.kron(sp.identity(d1 * d2), sp.csr_matrix(mat), format="csr")


def _frame_operators(params: SystemParams, frame: PolaritonFrame, trunc: TruncationSpec, basis: str):
    """A, B, b and the polariton-phonon coupling in the chosen phonon basis.

    ``basis="displaced"`` expresses everything after the exact unitary
    D(Q_A n_A + Q_B n_B): then A -> A D(-Q_A), B -> B D(-Q_B), b -> b - beta and
    the diagonal coupling becomes the shift -beta^2, with beta = Q_A n_A + Q_B n_B.
    Fewer phonon levels are needed because the polariton-conditioned
    displacement is built into the basis.
    """
    if basis not in BASES:
        raise ValueError(f"unknown phonon basis {basis!r}; expected one of {BASES}")
    A, B, b = _ops(trunc)
    Ad, Bd, bd = A.conj().T, B.conj().T, b.conj().T
    nA, nB = (Ad @ A).real, (Bd @ B).real
    x = bd + b
    wm = params.omega_m
    if basis == "fock":
        coupling = (frame.Q_A * nA + frame.Q_B * nB) @ x + frame.Q * (Ad @ B + Bd @ A) @ x
        return A.tocsr(), B.tocsr(), b.tocsr(), coupling
    d = trunc.n_phonon_max + 1
    qa, qb = frame.Q_A / wm, frame.Q_B / wm
    beta = qa * nA + qb * nB
    At = A @ _phonon_factor(trunc, displacement(-qa, d))
    Bt = B @ _phonon_factor(trunc, displacement(-qb, d))
    bt = b - beta
    # U (A^dag B) x U^dag = A^dag B D(qa - qb) (x - 2 beta)
    AdB = Ad @ B @ _phonon_factor(trunc, displacement(qa - qb, d))
    mix = AdB + AdB.conj().T
    coupling = -wm * (beta @ beta) + frame.Q * mix @ (x - 2 * beta)
    return At.tocsr(), Bt.tocsr(), bt.tocsr(), coupling


def _driven_sparse(params, frame, driven, trunc, basis):
    A, B, b, coupling = _frame_operators(params, frame, trunc, basis)
    A0, B0, b0 = _ops(trunc)
    nA = (A0.conj().T @ A0).real
    nB = (B0.conj().T @ B0).real
    c, s = math.cos(frame.theta), math.sin(frame.theta)
    Ad, Bd = A.conj().T, B.conj().T
    H = (
        driven.delta_A(frame) * nA
        + driven.delta_B * nB
        + params.omega_m * (b0.conj().T @ b0)
        + coupling
        + 1j * driven.epsilon * (c * (Ad - A) - s * (Bd - B))
    )
    H = 0.5 * (H + H.conj().T)
    return sp.csr_matrix(H), A, B, b


def build_driven_hamiltonian(
    params: SystemParams, frame: PolaritonFrame, driven: DrivenParams, trunc: TruncationSpec,
    basis: str = "fock",
) -> np.ndarray:
    """Rotating-frame Hamiltonian with the cavity drive written in polariton operators."""
    H, *_ = _driven_sparse(params, frame, driven, trunc, basis)
    return H.toarray()


def _dissipator(o: sp.spmatrix, n: int) -> sp.spmatrix:
    I = sp.identity(n, format="csr")
    odo = (o.conj().T @ o).tocsr()
    return sp.kron(o.conj(), o) - 0.5 * sp.kron(I, odo) - 0.5 * sp.kron(odo.T, I)


def build_liouvillian(
    params: SystemParams,
    frame: PolaritonFrame,
    driven: DrivenParams,
    trunc: TruncationSpec,
    dense: bool = False,
    basis: str = "fock",
):
    """Generator of the master equation acting on column-stacked vec(rho).

    Phonon bath enters as (gamma_m/2)[(n_th+1) D[b] + n_th D[b^dag]], the
    polaritons as kappa_A D[A] + kappa_B D[B].
    """
    n = trunc.dim
    if n * n > MAX_LIOUVILLIAN_DIM:
        raise ValueError(f"Liouvillian dimension {n * n} exceeds cap {MAX_LIOUVILLIAN_DIM}")
    H, A, B, b = _driven_sparse(params, frame, driven, trunc, basis)
    I = sp.identity(n, format="csr")
    L = -1j * (sp.kron(I, H) - sp.kron(H.T, I))
    half_gm = 0.5 * params.gamma_m
    if half_gm > 0:
        L = L + half_gm * (params.n_th + 1) * _dissipator(b, n)
        if params.n_th > 0:
            L = L + half_gm * params.n_th * _dissipator(b.conj().T.tocsr(), n)
    if frame.kappa_A > 0:
        L = L + frame.kappa_A * _dissipator(A, n)
    if frame.kappa_B > 0:
        L = L + frame.kappa_B * _dissipator(B, n)
    L = L.tocsc()
    return L.toarray() if dense else L


def trace_functional(n: int) -> np.ndarray:
    t = np.zeros(n * n)
    t[np.arange(n) * (n + 1)] = 1.0
    return t


def _bordered(L: sp.spmatrix) -> sp.csc_matrix:
    n = int(round(math.sqrt(L.shape[0])))
    t = sp.csr_matrix(trace_functional(n).reshape(1, -1))
    return sp.vstack([t, sp.csr_matrix(L)[1:]], format="csc")


class FactorCache:
    """Keeps the last LU factorization and reuses it as a GMRES preconditioner.

    Neighbouring sweep points differ by a small perturbation of the generator, so a
    stale factorization usually converges in a handful of Krylov steps. If it does
    not, the current matrix is refactored. Every answer still passes the residual
    check in :func:`steady_state`.
    """

    def __init__(self, max_krylov: int = 30):
        self.max_krylov = max_krylov
        self.lu = None
        self.factorizations = 0

    def solve(self, M: sp.csc_matrix, rhs: np.ndarray) -> np.ndarray:
        if self.lu is not None and self.lu.shape == M.shape:
            pre = spla.LinearOperator(M.shape, self.lu.solve, dtype=complex)
            x, info = spla.gmres(M, rhs, M=pre, rtol=1e-13, atol=0.0, restart=self.max_krylov, maxiter=1)
            if info == 0 and np.abs(M @ x - rhs).max() < 1e-11:
                return x
        self.lu = spla.splu(M)
        self.factorizations += 1
        return self.lu.solve(rhs)


def steady_state(liouvillian, residual_tol: float = 1e-8, cache: FactorCache | None = None) -> np.ndarray:
    """Null vector of the generator normalized to unit trace.

    The first equation is replaced by the trace condition and the resulting
    linear system is solved directly; the residual is checked afterwards.
    """
    L = sp.csc_matrix(liouvillian)
    n2 = L.shape[0]
    n = int(round(math.sqrt(n2)))
    M = _bordered(L)
    rhs = np.zeros(n2, dtype=complex)
    rhs[0] = 1.0
    try:
        vec = cache.solve(M, rhs) if cache is not None else spla.splu(M).solve(rhs)
    except RuntimeError as exc:
        raise SteadyStateError(f"steady-state system is singular: {exc}") from exc
    if not np.all(np.isfinite(vec)):
        raise SteadyStateError("steady-state solve produced non-finite values")
    rho = vec.reshape((n, n), order="F")
    resid = np.abs(L @ vec).max()
    if resid > residual_tol:
        lu = spla.splu(M)
        inv = spla.LinearOperator(M.shape, lu.solve, rmatvec=lambda y: lu.solve(y, trans="H"), dtype=complex)
        cond = spla.onenormest(M) * spla.onenormest(inv)
        raise SteadyStateError(f"steady-state residual {resid:.3g} > {residual_tol:g} (cond ~ {cond:.3g})")
    return 0.5 * (rho + rho.conj().T)


def check_density_matrix(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-8, psd_tol=1e-8) -> None:
    herm = np.abs(rho - rho.conj().T).max()
    tr = np.trace(rho)
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if herm > herm_tol or abs(tr - 1) > trace_tol or lam_min < -psd_tol:
        raise SteadyStateError(
            f"invalid density matrix: hermiticity {herm:.2g}, trace {tr:.12g}, min eigenvalue {lam_min:.3g}"
        )


def expect(op: np.ndarray, rho: np.ndarray) -> complex:
    return np.trace(op @ rho)


def g2_zero(rho: np.ndarray, trunc: TruncationSpec, floor: float = POPULATION_FLOOR) -> float:
    """<B^dag B^dag B B> / <B^dag B>^2 for polariton mode B."""
    B = build_annihilator("second", trunc)
    Bd = B.conj().T
    n1 = expect(Bd @ B, rho).real
    if n1 <= floor:
        raise UndefinedCorrelationError(f"<B^dag B> = {n1:.3g} is below the floor {floor:g}")
    n2 = expect(Bd @ Bd @ B @ B, rho).real
    return max(n2, 0.0) / n1**2


def solve_point(
    params: SystemParams, trunc: TruncationSpec, delta_B: float, cache: FactorCache | None = None,
    basis: str = "displaced",
):
    """Steady state at one detuning; returns (g2, <B^dag B>, rho).

    n_B commutes with the polaron displacement, so g2 and <B^dag B> read off the
    same way in either phonon basis.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        frame = frame_from_params(params)
    L = build_liouvillian(params, frame, DrivenParams(delta_B, params.epsilon), trunc, basis=basis)
    rho = steady_state(L, cache=cache)
    check_density_matrix(rho)
    B = build_annihilator("second", trunc)
    pop = expect(B.conj().T @ B, rho).real
    return g2_zero(rho, trunc), pop, rho


@dataclass(frozen=True)
class SweepPoint:
    x: float
    g2: float
    population: float
    error: str | None = None


def _sweep_chunk(tasks) -> list[SweepPoint]:
    cache = FactorCache()
    out = []
    for params, trunc, x, delta_B, basis in tasks:
        try:
            g2, pop, _ = solve_point(params, trunc, delta_B, cache, basis=basis)
            out.append(SweepPoint(x, g2, pop))
        except (SteadyStateError, UndefinedCorrelationError, ValueError) as exc:
            out.append(SweepPoint(x, math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
    return out


def _run(tasks: list, threads: int) -> list[SweepPoint]:
    # contiguous chunks so that neighbouring points share a factorization
    if threads <= 1 or len(tasks) < 2:
        return _sweep_chunk(tasks)
    k = min(threads, len(tasks))
    edges = np.linspace(0, len(tasks), k + 1).astype(int)
    chunks = [tasks[a:b] for a, b in zip(edges[:-1], edges[1:])]
    with ProcessPoolExecutor(max_workers=k) as pool:
        return [pt for res in pool.map(_sweep_chunk, chunks) for pt in res]


def sweep_g2(
    params: SystemParams, trunc: TruncationSpec, detunings: Sequence[float], threads: int = 1,
    basis: str = "displaced",
) -> list[SweepPoint]:
    """g2(0) and <B^dag B> versus the drive detuning Delta_B (one solve per point)."""
    if len(detunings) == 0:
        raise ValueError("empty detuning grid")
    return _run([(params, trunc, float(d), float(d), basis) for d in detunings], threads)


def sweep_g2_coupling(
    params: SystemParams,
    trunc: TruncationSpec,
    g0_values: Sequence[float],
    balanced: bool = True,
    lam_ratio: float | None = None,
    threads: int = 1,
    basis: str = "displaced",
) -> list[SweepPoint]:
    """g2(0) versus g0 with the drive locked at Delta_B = g0^2/omega_m.

    ``balanced`` sets lambda = g0; ``lam_ratio`` sets lambda = lam_ratio * g0;
    otherwise lambda stays at ``params.lam``.
    """
    if len(g0_values) == 0:
        raise ValueError("empty coupling grid")
    tasks = []
    for g0 in g0_values:
        g0 = float(g0)
        if lam_ratio is not None:
            lam = lam_ratio * g0
        elif balanced:
            lam = g0
        else:
            lam = params.lam
        p = params.with_(g0=g0, lam=lam)
        tasks.append((p, trunc, g0, g0**2 / params.omega_m, basis))
    return _run(tasks, threads)


def resonance_predictions(
    params: SystemParams,
    frame: PolaritonFrame,
    grwa_n1: Iterable[GrwaEigen],
    grwa_n2: Iterable[GrwaEigen],
    n_b_max: int = 3,
    balanced_tol: float = 1e-12,
) -> list[ResonancePrediction]:
    """Drive detunings Delta_B of one- and two-polariton resonances.

    Balanced couplings (g0 = lambda) use the displaced-ladder closed forms; otherwise
    detunings follow from GRWA energies through Delta_B' = Delta_B + eta/sin(2 theta).
    """
    wm = params.omega_m
    out: list[ResonancePrediction] = []
    if abs(params.g0 - params.lam) <= balanced_tol:
        x = params.g0**2 / wm
        for n in range(n_b_max + 1):
            out.append(ResonancePrediction("D", f"D{n}", x - n * wm, f"|1/2,-1/2>|{n}>_(1/2,-1/2)", "|0,0>|0>"))
            out.append(ResonancePrediction("P", f"P{n}", 2 * x - n * wm / 2, f"|1,-1>|{n}>_(1,-1)", "|0,0>|0>"))
            out.append(ResonancePrediction("S", f"S{n}", 3 * x - n * wm, f"|1,-1>|{n}>_(1,-1)",
                                           "|1/2,-1/2>|0>_(1/2,-1/2)"))
        return sorted(out, key=lambda r: (r.kind, r.delta_B))
    shift = frame.half_splitting
    n1 = list(grwa_n1)
    ground1 = next(e for e in n1 if e.branch == "G")
    for e in n1:
        if e.n_b > n_b_max:
            continue
        out.append(ResonancePrediction("D", f"D{e.branch}{e.n_b}", -e.energy - shift,
                                       f"psi_(1/2,{e.branch},{e.n_b})", "|0,0>|0>"))
    for e in grwa_n2:
        if e.n_b > n_b_max:
            continue
        origin = f"psi_(1,{e.branch},{e.n_b})"
        out.append(ResonancePrediction("P", f"P{e.branch}{e.n_b}", -e.energy / 2 - shift, origin, "|0,0>|0>"))
        out.append(ResonancePrediction("S", f"S{e.branch}{e.n_b}", -e.energy + ground1.energy - shift, origin,
                                       "psi_G(N=1)"))
    return sorted(out, key=lambda r: (r.kind, r.delta_B))
