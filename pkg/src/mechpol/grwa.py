"""Analytic eigensolutions in the generalized rotating-wave approximation.

Working frame: H3 = U2 U1 H1 U1^dag U2^dag, where U1 = exp(-i phi J_y) rotates the
polariton pseudo-spin and U2 polaron-shifts the phonon by (Omega N + G J_z)/omega_m.
In each polariton-number sector the pseudo-spin part (with the Franck-Condon
factor frozen at its vacuum value beta) is diagonalized exactly; single-phonon
exchange between those dressed levels is then kept only in its energy-conserving
form, giving small blocks that are solved in closed form.

All energies are relative to the sector baseline N (omega_A + omega_B)/2.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .angular import AngularState, rotation, spin_matrices
from .fock import displaced_fock, franck_condon_G0, franck_condon_R
from .params import SystemParams
from .polariton import PolaritonFrame


class CubicSolverError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DisplacedFock:
    beta: float
    n: int


@dataclass(frozen=True)
class AmplitudeTerm:
    state: AngularState
    phonon: DisplacedFock
    amplitude: float


@dataclass(frozen=True)
class GrwaEigen:
    """One GRWA eigenpair.

    ``amplitudes`` expand the state as sum c |j,m>' |n>_{j,m} in the U1-rotated
    angular basis; ``to_block_vector`` applies U1^dag and returns the state in
    the exact-solver basis of H1.
    """

    subspace_N: int
    branch: str
    n_b: int
    energy: float
    amplitudes: tuple[AmplitudeTerm, ...] = field(repr=False)
    phi: float = field(repr=False, default=0.0)

    @property
    def label(self) -> str:
        return f"{self.branch}{self.n_b}"

    def norm2(self) -> float:
        return float(sum(t.amplitude**2 for t in self.amplitudes))

    def lab_coefficients(self) -> dict[tuple[float, int, float], float]:
        """Map (m_lab, n, beta) -> coefficient after undoing the U1 rotation."""
        U1 = rotation(self.subspace_N, self.phi)
        j = self.subspace_N / 2
        out: dict[tuple[float, int, float], float] = {}
        for t in self.amplitudes:
            col = U1[t.state.index, :]  # U1^dag e_m = U1^T e_m  (U1 real orthogonal)
            for k, c in enumerate(col):
                if c == 0.0:
                    continue
                key = (-j + k, t.phonon.n, t.phonon.beta)
                out[key] = out.get(key, 0.0) + c * t.amplitude
        return out

    def to_block_vector(self, n_phonon_max: int) -> np.ndarray:
        d = n_phonon_max + 1
        vec = np.zeros((self.subspace_N + 1) * d)
        for (m, n, beta), c in self.lab_coefficients().items():
            k = round(m + self.subspace_N / 2)
            vec[k * d:(k + 1) * d] += c * displaced_fock(beta, n, d)
        return vec


# ---------------------------------------------------------------- small eigenproblems


def _sym2(a: float, d: float, c: float):
    """Ascending eigenpairs of [[a, c], [c, d]].

    Vectors follow the (1, mu)/norm convention: first component >= 0, else the
    second positive. Exact degeneracy with c == 0 keeps basis order.
    """
    mean, half = 0.5 * (a + d), 0.5 * math.hypot(a - d, 2 * c)
    evals = (mean - half, mean + half)
    if c == 0.0:
        lo_first = a <= d
        e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        return evals, ((e0, e1) if lo_first else (e1, e0))
    vecs = []
    for ev in evals:
        v1 = np.array([c, ev - a])
        v2 = np.array([ev - d, c])
        v = v1 if np.abs(v1).max() >= np.abs(v2).max() else v2
        # rescale first: for subnormal c the plain norm underflows to 0
        v = v / np.abs(v).max()
        v = v / np.linalg.norm(v)
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = -v
        vecs.append(v)
    return evals, tuple(vecs)


def _depressed(diag, c12: float, c23: float):
    d1, d2, d3 = diag
    b = -(d1 + d2 + d3)
    c = d1 * d2 + d2 * d3 + d3 * d1 - c12**2 - c23**2
    dd = -(d1 * d2 * d3 - d1 * c23**2 - d3 * c12**2)
    r = (3 * c - b * b) / 3
    s = (2 * b**3 - 9 * b * c + 27 * dd) / 27
    return b, c, dd, r, s


def cardano_roots(r: float, s: float) -> list[complex]:
    """Roots chi1 + chi2, w chi1 + w^2 chi2, w^2 chi1 + w chi2 of t^3 + r t + s."""
    w = complex(-0.5, math.sqrt(3) / 2)
    disc = cmath.sqrt((s / 2) ** 2 + (r / 3) ** 3)
    u = -s / 2 + disc
    if abs(u) < abs(-s / 2 - disc):
        u = -s / 2 - disc
    if u == 0:
        return [0j, 0j, 0j]
    chi1 = u ** (1 / 3)
    chi2 = -r / (3 * chi1)
    return [chi1 + chi2, w * chi1 + w * w * chi2, w * w * chi1 + w * chi2]


def tridiag3_eigvalsh(diag, c12: float, c23: float, method: str = "trig") -> np.ndarray:
    """Ascending eigenvalues of the real symmetric tridiagonal 3x3 matrix.

    Closed form through the depressed cubic t^3 + r t + s (shift -b/3); the
    trigonometric branch avoids complex cube roots, ``method="cardano"`` uses
    them. Each root gets a guarded Newton polish on the characteristic cubic,
    then a Rayleigh-quotient polish that fixes clustered roots.
    """
    b, c, dd, r, s = _depressed(diag, c12, c23)
    scale = max(1.0, *(abs(x) for x in diag), abs(c12), abs(c23))
    if method == "cardano":
        ts = [z.real for z in cardano_roots(r, s)]
    elif method == "trig":
        if r >= 0:
            # symmetric matrices have r <= 0; r ~ 0 means a triple root
            ts = [0.0, 0.0, 0.0]
        else:
            amp = 2 * math.sqrt(-r / 3)
            arg = (3 * s / (2 * r)) * math.sqrt(-3 / r)
            ang = math.acos(min(1.0, max(-1.0, arg)))
            ts = [amp * math.cos(ang / 3 - 2 * math.pi * k / 3) for k in range(3)]
    else:
        raise ValueError(f"unknown method {method!r}")
    roots = []
    for t in ts:
        x = t - b / 3
        for _ in range(3):
            f = ((x + b) * x + c) * x + dd
            fp = (3 * x + 2 * b) * x + c
            if fp == 0:
                break
            x_new = x - f / fp
            f_new = ((x_new + b) * x_new + c) * x_new + dd
            if abs(f_new) >= abs(f):
                break
            x = x_new
        roots.append(x)
    out = np.sort(np.array(roots))
    if np.all(np.isfinite(out)):
        out = _rayleigh_polish(diag, c12, c23, out, scale)
    if not np.all(np.isfinite(out)):
        raise CubicSolverError(f"non-finite cubic roots for diag={diag}, c=({c12}, {c23}); r={r}, s={s}")
    # trace is invariant; a large mismatch flags a wrong branch
    if abs(out.sum() - sum(diag)) > 1e-7 * scale:
        raise CubicSolverError(f"cubic branch selection failed: roots {out}, trace {sum(diag)}")
    return out


def _rayleigh_polish(diag, c12: float, c23: float, roots: np.ndarray, scale: float) -> np.ndarray:
    """Replace each root by v^T T v of its null vector.

    Clustered roots of the cubic carry sqrt(eps) errors; the Rayleigh quotient is
    second order in the vector error and stays accurate there. Kept only if the
    polished set still sums to the trace.
    """
    T = np.array([[diag[0], c12, 0.0], [c12, diag[1], c23], [0.0, c23, diag[2]]])
    polished = []
    for ev in roots:
        M = T - ev * np.eye(3)
        cands = [np.cross(M[0], M[1]), np.cross(M[1], M[2]), np.cross(M[0], M[2])]
        v = max(cands, key=lambda w: np.abs(w).max())
        top = np.abs(v).max()
        if top == 0.0:
            polished.append(ev)
            continue
        v = v / top
        polished.append(float(v @ T @ v / (v @ v)))
    polished = np.sort(np.array(polished))
    if abs(polished.sum() - sum(diag)) <= 1e-12 * scale and np.all(np.abs(polished - roots) <= 1e-6 * scale):
        return polished
    return roots


def cubic_eigen3(e1: float, e2: float, e3: float, coupling: float) -> np.ndarray:
    """Eigenvalues of the 3x3 zeroth-order block with off-diagonals coupling/sqrt(2)."""
    c = coupling * math.sqrt(2) / 2
    return tridiag3_eigvalsh((e1, e2, e3), c, c)


def _tridiag3_vector(diag, c12: float, c23: float, ev: float) -> np.ndarray:
    """Null vector of (T - ev) for a symmetric tridiagonal 3x3 T, middle component >= 0."""
    T = np.array([[diag[0], c12, 0.0], [c12, diag[1], c23], [0.0, c23, diag[2]]]) - ev * np.eye(3)
    cands = [np.cross(T[0], T[1]), np.cross(T[1], T[2]), np.cross(T[0], T[2])]
    v = max(cands, key=np.linalg.norm)
    nv = np.linalg.norm(v)
    if nv < 1e-13 * max(1.0, np.abs(T).max()) ** 2:
        # degenerate eigenvalue: fall back to a dense solver for this block
        w, V = np.linalg.eigh(T + ev * np.eye(3))
        v = V[:, int(np.argmin(abs(w - ev)))]
    else:
        v = v / nv
    if v[1] < 0 or (v[1] == 0 and (v[0] < 0 or (v[0] == 0 and v[2] < 0))):
        v = -v
    return v


def _tridiag3_eig(diag, c12: float, c23: float):
    evals = tridiag3_eigvalsh(diag, c12, c23)
    if c12 == 0.0 and c23 == 0.0:
        order = np.argsort(np.asarray(diag), kind="stable")
        vecs = [np.eye(3)[k] for k in order]
        return np.asarray(diag, dtype=float)[order], vecs
    vecs = [_tridiag3_vector(diag, c12, c23, ev) for ev in evals]
    # near-degenerate pairs: re-orthonormalize to keep the basis unitary
    V = np.array(vecs).T
    if abs(V.T @ V - np.eye(3)).max() > 1e-10:
        w, Vd = np.linalg.eigh(np.array([[diag[0], c12, 0], [c12, diag[1], c23], [0, c23, diag[2]]]))
        return w, [Vd[:, k] if Vd[1, k] >= 0 else -Vd[:, k] for k in range(3)]
    return evals, vecs


# ---------------------------------------------------------------- energies


def decoupled_energies(j: float, m: float, n_b: int, params: SystemParams, frame: PolaritonFrame) -> float:
    """Closed-form levels when the three-wave mixing term drops out (phi = 0 or g0 = lambda).

    Absolute energy (baseline included).
    """
    wm = params.omega_m
    dA, dB, dAB = params.g0**2 / wm, params.lam**2 / wm, params.g0 * params.lam / wm
    nA, nB = j + m, j - m
    return (
        j * (frame.omega_A + frame.omega_B)
        + m * frame.splitting
        + n_b * wm
        - nA**2 * dA
        - nB**2 * dB
        - 2 * nA * nB * dAB
    )


def _g(frame: PolaritonFrame, params: SystemParams) -> float:
    return frame.G / params.omega_m


def zeroth_order_N1(params: SystemParams, frame: PolaritonFrame, n_b: int):
    """Eigenpairs of the zeroth-order N=1 block in the n_b manifold.

    Basis (|1/2,-1/2, n_b>, |1/2, 1/2, n_b>) of the rotated frame. Returns
    ((eps_minus, eps_plus), (v_minus, v_plus)).
    """
    if n_b < 0:
        raise ValueError("n_b must be >= 0")
    wm = params.omega_m
    split, phi = frame.splitting, frame.phi
    e1 = -0.5 * split * math.cos(phi) + n_b * wm - params.lam**2 / wm
    e2 = 0.5 * split * math.cos(phi) + n_b * wm - params.g0**2 / wm
    B = split * math.sin(phi) * franck_condon_G0(n_b, _g(frame, params))
    return _sym2(e1, e2, 0.5 * B)


def _zeroth_order_N2_block(params: SystemParams, frame: PolaritonFrame, n_b: int):
    wm = params.omega_m
    split, phi = frame.splitting, frame.phi
    two_om, G = 2 * frame.Omega, frame.G
    diag = (
        -split * math.cos(phi) + n_b * wm - (two_om - G) ** 2 / wm,
        n_b * wm - two_om**2 / wm,
        split * math.cos(phi) + n_b * wm - (two_om + G) ** 2 / wm,
    )
    B = split * math.sin(phi) * franck_condon_G0(n_b, G / wm)
    return diag, B


def zeroth_order_N2(params: SystemParams, frame: PolaritonFrame, n_b: int):
    """Eigenpairs of the zeroth-order N=2 block (basis |1,-1>, |1,0>, |1,1> at n_b)."""
    diag, B = _zeroth_order_N2_block(params, frame, n_b)
    c = B * math.sqrt(2) / 2
    return _tridiag3_eig(diag, c, c)


def _dressed_couplings(U: np.ndarray, n_pol: int):
    """Pseudo-spin matrices J_x and i J_y seen in the dressed basis (rows of U)."""
    Jx, Jy, _ = spin_matrices(n_pol)
    L = U @ Jx.real @ U.T
    M = U @ (1j * Jy).real @ U.T
    return L, M


def _angular_terms(n_pol: int, frame: PolaritonFrame, wm: float, dressed: np.ndarray, pieces):
    """Expand sum_i c_i |dressed_i>|k_i> into amplitudes over (m, displaced |k>)."""
    j = n_pol / 2
    terms = []
    for i, k, c in pieces:
        for idx in range(n_pol + 1):
            amp = c * dressed[i][idx]
            if amp == 0.0:
                continue
            m = -j + idx
            terms.append(
                AmplitudeTerm(AngularState(j, m), DisplacedFock(frame.beta(n_pol, m) / wm, k), float(amp))
            )
    return tuple(terms)


def grwa_N1(params: SystemParams, frame: PolaritonFrame, n_b_max: int) -> list[GrwaEigen]:
    """Ground state plus the two GRWA levels of every manifold n_b = 1..n_b_max."""
    if n_b_max < 1:
        raise ValueError("n_b_max must be >= 1")
    wm = params.omega_m
    g = _g(frame, params)
    ssp = frame.splitting * math.sin(frame.phi)
    (eps_m, eps_p), (u_m, u_p) = zeroth_order_N1(params, frame, 0)
    U3 = np.array([u_m, u_p])
    L, M = _dressed_couplings(U3, 1)
    # J_x = sigma_x / 2, i J_y = i sigma_y / 2: the factor 1/2 sits inside L and M
    beta0 = franck_condon_G0(0, g)

    def xi(p: int, n: int) -> float:
        eps = (eps_m, eps_p)[p]
        return eps + L[p, p] * ssp * (franck_condon_G0(n, g) - beta0)

    # ground state U1^dag U2^dag |1/2,-1/2,0> as written in closed form (no U3^dag)
    ground = AmplitudeTerm(AngularState(0.5, -0.5), DisplacedFock(frame.beta(1, -0.5) / wm, 0), 1.0)
    out = [GrwaEigen(1, "G", 0, eps_m, (ground,), frame.phi)]
    for n in range(1, n_b_max + 1):
        P = M[0, 1] * ssp * franck_condon_R(n, g)
        a = n * wm + xi(0, n)
        d = (n - 1) * wm + xi(1, n - 1)
        (E_lo, E_hi), (v_lo, v_hi) = _sym2(a, d, P)
        for branch, E, v in (("-", E_lo, v_lo), ("+", E_hi, v_hi)):
            terms = _angular_terms(1, frame, wm, U3, [(0, n, v[0]), (1, n - 1, v[1])])
            out.append(GrwaEigen(1, branch, n, E, terms, frame.phi))
    return out


def grwa_N2(params: SystemParams, frame: PolaritonFrame, n_b_max: int) -> list[GrwaEigen]:
    """Ground state, the two-level n_b = 0 block and the three-level blocks n_b = 1..n_b_max."""
    if n_b_max < 1:
        raise ValueError("n_b_max must be >= 1")
    wm = params.omega_m
    g = _g(frame, params)
    ssp = frame.splitting * math.sin(frame.phi)
    eps, vecs = zeroth_order_N2(params, frame, 0)
    U4 = np.array(vecs)
    L, M = _dressed_couplings(U4, 2)
    beta0 = franck_condon_G0(0, g)

    def xi(i: int, n: int) -> float:
        return eps[i] + L[i, i] * ssp * (franck_condon_G0(n, g) - beta0)

    ground = AmplitudeTerm(AngularState(1.0, -1.0), DisplacedFock(frame.beta(2, -1.0) / wm, 0), 1.0)
    out = [GrwaEigen(2, "G", 0, float(eps[0]), (ground,), frame.phi)]
    X = M[0, 1] * ssp * franck_condon_R(1, g)
    (E1, E2), (v1, v2) = _sym2(wm + xi(0, 1), xi(1, 0), X)
    for q, E, v in (("1", E1, v1), ("2", E2, v2)):
        terms = _angular_terms(2, frame, wm, U4, [(0, 1, v[0]), (1, 0, v[1])])
        out.append(GrwaEigen(2, q, 0, E, terms, frame.phi))
    for n in range(1, n_b_max + 1):
        P = M[0, 1] * ssp * franck_condon_R(n + 1, g)
        D = M[1, 2] * ssp * franck_condon_R(n, g)
        diag = ((n + 1) * wm + xi(0, n + 1), n * wm + xi(1, n), (n - 1) * wm + xi(2, n - 1))
        evals, vs = _tridiag3_eig(diag, P, D)
        for q, (E, v) in enumerate(zip(evals, vs), start=1):
            terms = _angular_terms(2, frame, wm, U4, [(0, n + 1, v[0]), (1, n, v[1]), (2, n - 1, v[2])])
            out.append(GrwaEigen(2, str(q), n, float(E), terms, frame.phi))
    return out
