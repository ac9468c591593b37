"""End-to-end acceptance checks.

Each ``criterion_k`` returns a :class:`CriterionResult`; nothing here raises on
a failed check. The heavy open-system sweeps (6, 7) take minutes on one core.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import argrelextrema

from .compare import max_deviation, paired_levels
from .exact import exact_block_spectrum
from .fock import displacement, franck_condon_G0, franck_condon_R
from .grwa import grwa_N1, tridiag3_eigvalsh
from .open_system import (
    FactorCache,
    build_liouvillian,
    check_density_matrix,
    DrivenParams,
    expect,
    solve_point,
    steady_state,
    sweep_g2,
    sweep_g2_coupling,
    SteadyStateError,
)
from .operators import build_annihilator
from .params import SystemParams, TruncationSpec
from .polariton import frame_from_params
from .spectrum import (
    component_weights,
    default_grid,
    evaluate_spectrum,
    spectrum_lines,
    sum_rule_reference,
)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.title} ({self.seconds:.1f} s) -- {self.detail}"


def _frame(p: SystemParams):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return frame_from_params(p)


def _timed(number: int, title: str, fn) -> CriterionResult:
    t0 = time.perf_counter()
    passed, detail, data = fn()
    return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - t0, data)


# ------------------------------------------------------------------ 1: GRWA vs exact

def criterion_1(n_phonon_max: int = 12) -> CriterionResult:
    def run():
        worst = {}
        bad = []
        for g0 in np.round(np.arange(0.0, 0.81, 0.1), 10):
            p = SystemParams(g0=float(g0), lam=0.5, eta=0.5)
            fr = _frame(p)
            d1 = max_deviation(paired_levels(p, fr, 1, 4, n_phonon_max, warn=False), {"+", "-"})
            d2 = max_deviation(paired_levels(p, fr, 2, 3, n_phonon_max, warn=False), {"1", "2", "3"})
            tol = 0.02 if g0 <= 0.5 + 1e-12 else 0.08
            worst[float(g0)] = (d1, d2, tol)
            if d1 > tol or d2 > tol:
                bad.append(f"g0={g0:.1f}: N1 {d1:.4f}, N2 {d2:.4f} > {tol}")
        detail = "all levels within tolerance" if not bad else "; ".join(bad)
        return not bad, detail, {"worst": worst}

    return _timed(1, "GRWA-exact level agreement", run)


# ------------------------------------------------------------------ 2: closed gap

def criterion_2() -> CriterionResult:
    def run():
        msgs = []
        ok = True
        p = SystemParams(g0=0.5, lam=0.5, eta=0.5)
        levels = grwa_N1(p, _frame(p), 4)
        gaps = []
        for n in range(1, 5):
            e = {lv.branch: lv.energy for lv in levels if lv.n_b == n}
            gaps.append(abs(e["+"] - e["-"]))
        gmax = max(gaps)
        ok &= gmax < 1e-8
        msgs.append(f"GRWA gap at g0=lambda {gmax:.2e}")
        grid = np.round(np.arange(0.0, 1.0 + 1e-9, 0.01), 10)
        for lam in (0.3, 0.5, 0.7):
            gap = []
            for g0 in grid:
                q = SystemParams(g0=float(g0), lam=lam, eta=0.5)
                e = exact_block_spectrum(q, _frame(q), 1, 12).energies
                gap.append(e[2] - e[1])
            g_at = grid[int(np.argmin(gap))]
            hit = abs(g_at - lam) <= 0.01 + 1e-12
            ok &= hit
            msgs.append(f"lambda={lam}: exact gap min at g0={g_at:.2f}")
        return ok, "; ".join(msgs), {}

    return _timed(2, "closed gap at g0 = lambda", run)


# ------------------------------------------------------------------ 3: N=0 sector

def criterion_3(draws: int = 20, seed: int = 3) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(draws):
            g0, lam = rng.uniform(0, 1.2, 2)
            p = SystemParams(g0=float(g0), lam=float(lam), eta=0.5, omega_c=10 + rng.uniform(-1, 1))
            e = exact_block_spectrum(p, _frame(p), 0, 12).energies
            worst = max(worst, float(np.abs(e - np.arange(e.size)).max()))
        return worst <= 1e-10, f"max |E - n_b| = {worst:.2e}", {}

    return _timed(3, "N=0 sector energies", run)


# ------------------------------------------------------------------ 4: spectrum structure

def _fwhm(x, y):
    top = y.max()
    i = int(np.argmax(y))
    half = top / 2

    def cross(j, step):
        while 0 < j < len(y) - 1 and y[j] > half:
            j += step
        # linear interpolation between j and j - step
        x0, x1, y0, y1 = x[j], x[j - step], y[j], y[j - step]
        return x0 + (half - y0) * (x1 - x0) / (y1 - y0)

    return cross(i, 1) - cross(i, -1), x[i]


def criterion_4() -> CriterionResult:
    def run():
        msgs, ok = [], True
        gamma = 0.15
        # (a) single Lorentzian
        p = SystemParams(g0=0.0, lam=0.0, eta=0.5)
        fr = _frame(p)
        lines = spectrum_lines(p, fr, 2, 6)
        grid = np.linspace(fr.omega_B - 2, fr.omega_B + 2, 40001)
        s = evaluate_spectrum(lines, gamma, grid)
        width, peak = _fwhm(grid, s.total)
        a_ok = abs(width - 2 * gamma) <= 0.02 * 2 * gamma and abs(peak - fr.omega_B) <= grid[1] - grid[0]
        ok &= a_ok
        msgs.append(f"(a) FWHM {width:.4f} vs {2 * gamma}, peak at w_B{peak - fr.omega_B:+.1e}")
        # (b) sideband lattice
        p = SystemParams(g0=0.5, lam=0.0, eta=0.5)
        fr = _frame(p)
        states = grwa_N1(p, fr, 6)
        delta = {(k.branch, k.n_b): fr.half_splitting + k.energy for k in states}
        lines = spectrum_lines(p, fr, 2, 6, states=states)
        off = 0.0
        spacing = 0.0
        groups: dict = {}
        for ln in lines:
            br, n1, n2 = ln.origin
            off = max(off, abs(ln.center - (fr.omega_B + delta[(br, n1)] - n2)))
            groups.setdefault((br, n1), []).append((n2, ln.center))
        for pts in groups.values():
            pts.sort()
            for (m1, c1), (m2, c2) in zip(pts, pts[1:]):
                spacing = max(spacing, abs((c1 - c2) - (m2 - m1)))
        b_ok = off <= 1e-10 and spacing <= 1e-10
        ok &= b_ok
        msgs.append(f"(b) lattice offset {off:.1e}, spacing error {spacing:.1e}")
        # (c) lambda = 0.5, g0 = 0
        p = SystemParams(g0=0.0, lam=0.5, eta=0.5)
        fr = _frame(p)
        lines = spectrum_lines(p, fr, 2, 6)
        wmax = max(ln.weight for ln in lines)
        n_side = len({round(ln.center, 9) for ln in lines if ln.weight > 0.01 * wmax})
        cw = component_weights(lines)
        dominant = max(cw, key=cw.get)
        c_ok = n_side >= 3 and dominant == "S2"
        ok &= c_ok
        msgs.append(
            f"(c) {n_side} lines above 1% of max; weights S2={cw['S2']:.4f} S3={cw['S3']:.4f} (dominant {dominant})"
        )
        # (d) S1 vanishes for n0 = 2
        s1 = 0.0
        for g0, lam in ((0.0, 0.5), (0.3, 0.5), (0.5, 0.0), (0.8, 0.5), (0.3, 0.0)):
            q = SystemParams(g0=g0, lam=lam, eta=0.5)
            s1 = max(s1, component_weights(spectrum_lines(q, _frame(q), 2, 6))["S1"])
        d_ok = s1 < 1e-12
        ok &= d_ok
        msgs.append(f"(d) max S1 weight {s1:.1e}")
        return ok, "; ".join(msgs), {"parts": (a_ok, b_ok, c_ok, d_ok), "weights_c": cw}

    return _timed(4, "emission spectrum structure", run)


# ------------------------------------------------------------------ 5: sum rule

def criterion_5(draws: int = 10, seed: int = 5) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(draws):
            p = SystemParams(
                g0=float(rng.uniform(0, 0.8)),
                lam=float(rng.uniform(0, 0.8)),
                eta=float(rng.uniform(0.3, 0.8)),
                omega_c=float(10 + rng.uniform(-0.5, 0.5)),
            )
            fr = _frame(p)
            n0 = int(rng.integers(0, 4))
            states = grwa_N1(p, fr, 6)
            total = sum(ln.weight for ln in spectrum_lines(p, fr, n0, 6, states=states))
            ref = sum_rule_reference(p, fr, n0, 6, states=states)
            worst = max(worst, abs(total - ref))
        return worst <= 1e-6, f"max |sum weights - reference| = {worst:.2e}", {}

    return _timed(5, "spectral sum rule", run)


# ------------------------------------------------------------------ 6, 7: g2 sweeps

def _extrema(x, g):
    mins = argrelextrema(g, np.less)[0]
    maxs = argrelextrema(g, np.greater)[0]
    return [(float(x[i]), float(g[i])) for i in mins], [(float(x[i]), float(g[i])) for i in maxs]


def _certify(params, trunc, delta_B, basis="displaced"):
    g_a, _, _ = solve_point(params, trunc, delta_B, basis=basis)
    up = TruncationSpec(trunc.n_pol_max, trunc.n_phonon_max + 1)
    g_b, _, _ = solve_point(params, up, delta_B, basis=basis)
    return g_a, g_b, abs(g_b - g_a) / max(abs(g_a), 1e-300)


def criterion_6(threads: int = 1, n_phonon_max: int = 5) -> CriterionResult:
    def run():
        p = SystemParams(g0=0.5, lam=0.5, eta=0.5)
        fr = _frame(p)
        trunc = TruncationSpec(2, n_phonon_max)
        x = np.round(np.arange(-2.0, 1.0 + 1e-9, 0.005), 10)
        pts = sweep_g2(p, trunc, x, threads=threads)
        errs = [q for q in pts if q.error]
        g = np.array([q.g2 for q in pts])
        mins, maxs = _extrema(x, g)
        tol = max(fr.kappa_B, 0.01)
        ok = not errs
        msgs = []
        for n in range(3):
            t = 0.25 - n
            hit = [m for m in mins if abs(m[0] - t) <= tol + 1e-12 and m[1] < 1]
            ok &= bool(hit)
            msgs.append(f"D{n}@{t:+.2f}:" + (f"min {hit[0][0]:+.3f} g2={hit[0][1]:.3f}" if hit else "missing"))
        for n in range(3):
            t = 0.5 - n / 2
            hit = [m for m in maxs if abs(m[0] - t) <= tol + 1e-12 and m[1] > 1]
            ok &= bool(hit)
            msgs.append(f"P{n}@{t:+.2f}:" + (f"max {hit[0][0]:+.3f} g2={hit[0][1]:.2f}" if hit else "missing"))
        if errs:
            msgs.append(f"{len(errs)} failed points")
        return ok, "; ".join(msgs), {"x": x, "g2": g, "mins": mins, "maxs": maxs}

    return _timed(6, "g2 resonance map, balanced coupling", run)


def criterion_7(threads: int = 1, n_phonon_max: int = 7) -> CriterionResult:
    def run():
        base = SystemParams(eta=0.5)
        trunc = TruncationSpec(2, n_phonon_max)
        g0s = np.round(np.arange(0.1, 1.1 + 1e-9, 0.01), 10)
        pts = sweep_g2_coupling(base, trunc, g0s, balanced=True, threads=threads)
        errs = [q for q in pts if q.error]
        g = np.array([q.g2 for q in pts])
        _, maxs = _extrema(g0s, g)
        ok = not errs
        msgs = []
        for t in (math.sqrt(0.5), 1.0):
            near = [m for m in maxs if abs(m[0] - t) <= 0.02 + 1e-12]
            if not near:
                ok = False
                msgs.append(f"max near {t:.3f}: missing")
                continue
            g0_pk = near[0][0]
            q = base.with_(g0=g0_pk, lam=g0_pk)
            # converged value at the peak: cutoff and cutoff + 1 must agree to 1%
            g_a, g_b, rel = _certify(q, trunc, g0_pk**2)
            hit = g_b > 1
            ok &= hit
            msgs.append(f"max at g0={g0_pk:.2f} g2={g_b:.3f} (cutoff+1 change {100 * rel:.1f}%)")
        resonances = (math.sqrt(0.5), 1.0)
        away = [gi for gi, xi in zip(g, g0s) if min(abs(xi - r) for r in resonances) > 0.05]
        below = bool(np.all(np.array(away) < 1))
        ok &= below
        msgs.append(f"away from resonances max g2 = {max(away):.3f}")
        if errs:
            msgs.append(f"{len(errs)} failed points")
        return ok, "; ".join(msgs), {"g0": g0s, "g2": g, "maxs": maxs}

    return _timed(7, "g2 coupling sweep", run)


# ------------------------------------------------------------------ 8: open-system sanity

def criterion_8() -> CriterionResult:
    def run():
        msgs, ok = [], True
        # density-matrix invariants over a spread of driven states
        n_states = 0
        try:
            for g0, lam, d in ((0.5, 0.5, 0.25), (0.3, 0.5, -0.6), (0.8, 0.5, 0.1), (0.0, 0.5, -1.0), (0.5, 0.5, -0.5)):
                p = SystemParams(g0=g0, lam=lam, eta=0.5)
                for basis in ("fock", "displaced"):
                    L = build_liouvillian(p, _frame(p), DrivenParams(d, p.epsilon), TruncationSpec(2, 5), basis=basis)
                    check_density_matrix(steady_state(L))
                    n_states += 1
            msgs.append(f"{n_states} steady states valid")
        except SteadyStateError as exc:
            ok = False
            msgs.append(str(exc))
        # thermal phonon marginal, no drive, no couplings
        p = SystemParams(g0=0.0, lam=0.0, eta=0.5, epsilon=0.0, n_th=0.5, gamma_m=0.01)
        trunc = TruncationSpec(1, 40)
        rho = steady_state(build_liouvillian(p, _frame(p), DrivenParams(0.0, 0.0), trunc))
        b = build_annihilator("phonon", trunc)
        nb = expect(b.conj().T @ b, rho).real
        ok &= abs(nb - p.n_th) <= 1e-6
        msgs.append(f"<b^dag b> = {nb:.8f} (n_th {p.n_th})")
        # linear system stays Poissonian
        p = SystemParams(g0=0.0, lam=0.0, eta=0.5)
        trunc = TruncationSpec(3, 2)
        cache = FactorCache()
        worst = 0.0
        for d in np.linspace(-2, 1, 61):
            g2, _, _ = solve_point(p, trunc, float(d), cache)
            worst = max(worst, abs(g2 - 1))
        ok &= worst <= 0.02
        msgs.append(f"linear |g2 - 1| <= {worst:.4f}")
        return ok, "; ".join(msgs), {}

    return _timed(8, "open-system sanity", run)


# ------------------------------------------------------------------ 9: kernels

def criterion_9(draws: int = 1000, seed: int = 9) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        worst_c = 0.0
        for _ in range(draws):
            diag = rng.normal(size=3) * rng.choice([0.1, 1, 10])
            c12, c23 = rng.normal(size=2)
            M = np.diag(diag) + np.diag([c12, c23], 1) + np.diag([c12, c23], -1)
            ref = np.linalg.eigvalsh(M)
            got = tridiag3_eigvalsh(diag, c12, c23, method="cardano")
            worst_c = max(worst_c, float(np.abs(np.sort(got) - ref).max()))
        worst_f = 0.0
        for beta in np.linspace(-1.5, 1.5, 31):
            D = displacement(float(beta), 9)
            for n in range(9):
                worst_f = max(worst_f, abs(franck_condon_G0(n, float(beta)) - D[n, n]))
                if n >= 1:
                    worst_f = max(worst_f, abs(franck_condon_R(n, float(beta)) - D[n, n - 1]))
        ok = worst_c <= 1e-9 and worst_f <= 1e-8
        return ok, f"cubic vs eigvalsh {worst_c:.1e}; Franck-Condon vs expm {worst_f:.1e}", {}

    return _timed(9, "numerical kernels", run)


ALL = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
       criterion_9)
