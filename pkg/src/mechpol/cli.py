"""Command-line front end: ``mechpol <command> [--config FILE] [--out FILE] ...``.

Exit codes: 0 ok, 1 validation failure, 2 configuration error, 3 numerical
failure, 4 partial sweep (completed points are still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import tempfile
import time
import warnings
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .compare import GrwaValidityWarning, paired_levels
from .config import COMMANDS, FORMATS, ConfigError, RunConfig, Sweep, load_config, sweep_target
from .exact import EigensolverError, exact_block_spectrum
from .grwa import CubicSolverError, grwa_N1, grwa_N2
from .open_system import (
    SteadyStateError,
    UndefinedCorrelationError,
    resonance_predictions,
    solve_point,
    sweep_g2,
    sweep_g2_coupling,
)
from .params import TruncationSpec
from .polariton import DegenerateFrameError, FrameValidityWarning, frame_from_params
from .spectrum import evaluate_spectrum, spectrum_lines

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3, 4
NUMERIC_ERRORS = (EigensolverError, SteadyStateError, CubicSolverError, UndefinedCorrelationError,
                  np.linalg.LinAlgError)


class PartialSweep(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


# ------------------------------------------------------------------ commands


def _frame(params):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FrameValidityWarning)
        fr = frame_from_params(params)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return fr


def _param_grid(cfg: RunConfig, default_var: str):
    if cfg.sweep is None:
        var = default_var
        attr = sweep_target(var)
        return var, [(getattr(cfg.params, attr), cfg.params)]
    var = cfg.sweep.variable
    attr = sweep_target(var)
    if attr == "delta_B":
        raise ConfigError("delta_B is only a sweep variable for g2-sweep")
    out = []
    for v in cfg.sweep.values():
        try:
            out.append((float(v), cfg.params.with_(**{attr: float(v)})))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return var, out


def cmd_energies(cfg: RunConfig, meta: dict):
    N = cfg.opt("energies", "subspace")
    n_b_max = cfg.opt("energies", "n_b_max")
    nph = cfg.opt("energies", "exact_phonon_max")
    if N not in (0, 1, 2):
        raise ConfigError("subspace must be 0, 1 or 2")
    var, grid = _param_grid(cfg, "g0")
    cols = [var, "branch", "n_b", "E_grwa", "E_exact"]
    rows = []
    n_warn = 0
    for v, p in grid:
        fr = _frame(p)
        if N == 0:
            ex = exact_block_spectrum(p, fr, 0, nph).energies
            for n in range(n_b_max + 1):
                rows.append({var: v, "branch": "0", "n_b": n, "E_grwa": n * p.omega_m, "E_exact": ex[n]})
            continue
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", GrwaValidityWarning)
            pairs = paired_levels(p, fr, N, n_b_max, nph)
        n_warn += len(caught)
        for pr in pairs:
            rows.append({var: v, "branch": pr.branch, "n_b": pr.n_b, "E_grwa": pr.e_grwa, "E_exact": pr.e_exact})
    meta["grwa_validity_warnings"] = n_warn
    meta["energy_reference"] = "relative to N (omega_A + omega_B) / 2"
    return cols, rows


def cmd_spectrum(cfg: RunConfig, meta: dict):
    if cfg.sweep is not None:
        raise ConfigError("spectrum does not take a sweep")
    p = cfg.params
    if not p.gamma_spec > 0:
        raise ConfigError("gamma_spec must be > 0")
    fr = _frame(p)
    o = cfg.options["spectrum"]
    lines = spectrum_lines(p, fr, o["n0"], o["n_b_max"])
    grid = fr.omega_B + np.linspace(o["omega_min"], o["omega_max"], o["points"])
    s = evaluate_spectrum(lines, p.gamma_spec, grid)
    cols = ["omega", "detuning", "total", "S1", "S2", "S3"]
    rows = [
        {"omega": w, "detuning": w - fr.omega_B, "total": t, "S1": a, "S2": b, "S3": c}
        for w, t, a, b, c in zip(s.grid, s.total, s.s1, s.s2, s.s3)
    ]
    meta["omega_B"] = fr.omega_B
    meta["lines"] = [
        {"weight": ln.weight, "center": ln.center, "component": ln.component, "branch": ln.origin[0],
         "n1": ln.origin[1], "n2": ln.origin[2]}
        for ln in lines
    ]
    return cols, rows


def _certify(cfg: RunConfig, points, param_of, delta_of) -> list[dict]:
    """Re-solve local extrema at phonon cutoff + 1."""
    g = np.array([q.g2 for q in points])
    up = TruncationSpec(cfg.trunc.n_pol_max, cfg.trunc.n_phonon_max + 1)
    out = []
    for i in range(1, len(g) - 1):
        if not (np.isfinite(g[i - 1:i + 2]).all()):
            continue
        if (g[i] > g[i - 1] and g[i] > g[i + 1]) or (g[i] < g[i - 1] and g[i] < g[i + 1]):
            x = points[i].x
            g_up, _, _ = solve_point(param_of(x), up, delta_of(x), basis=cfg.phonon_basis)
            rel = abs(g_up - g[i]) / g[i] if g[i] > 0 else math.inf
            out.append({"x": x, "g2": g[i], "g2_cutoff_plus_1": g_up, "relative_change": rel, "ok": rel <= 0.01})
    return out


def _sweep_rows(points, extra=None):
    rows = []
    for q in points:
        r = {"g2": q.g2, "population": q.population, "error": q.error or ""}
        if extra:
            r.update(extra(q))
        rows.append(r)
    return rows


def cmd_g2_sweep(cfg: RunConfig, meta: dict):
    if cfg.sweep is None or cfg.sweep.variable != "delta_B":
        raise ConfigError("g2-sweep needs a sweep over delta_B")
    _frame(cfg.params)
    xs = cfg.sweep.values()
    pts = sweep_g2(cfg.params, cfg.trunc, xs, threads=cfg.threads, basis=cfg.phonon_basis)
    rows = _sweep_rows(pts, lambda q: {"delta_B": q.x})
    if cfg.opt("certify", "enabled"):
        meta["certification"] = _certify(cfg, pts, lambda x: cfg.params, lambda x: x)
    meta["failed_points"] = sum(1 for q in pts if q.error)
    return ["delta_B", "g2", "population", "error"], rows


def _lambda_of(cfg: RunConfig):
    mode = cfg.opt("coupling", "lambda_mode")
    ratio = cfg.opt("coupling", "lambda_ratio")
    if mode == "balanced":
        return lambda g0: g0
    if mode == "ratio":
        return lambda g0: ratio * g0
    return lambda g0: cfg.params.lam


def cmd_g2_coupling(cfg: RunConfig, meta: dict):
    if cfg.sweep is None or cfg.sweep.variable != "g0":
        raise ConfigError("g2-coupling-sweep needs a sweep over g0")
    g0s = cfg.sweep.values()
    mode = cfg.opt("coupling", "lambda_mode")
    lam_of = _lambda_of(cfg)
    pts = sweep_g2_coupling(
        cfg.params, cfg.trunc, g0s, balanced=(mode == "balanced"),
        lam_ratio=cfg.opt("coupling", "lambda_ratio") if mode == "ratio" else None,
        threads=cfg.threads, basis=cfg.phonon_basis,
    )
    rows = _sweep_rows(pts, lambda q: {"g0": q.x, "lambda": lam_of(q.x), "delta_B": q.x**2 / cfg.params.omega_m})
    if cfg.opt("certify", "enabled"):
        meta["certification"] = _certify(
            cfg, pts, lambda x: cfg.params.with_(g0=x, lam=lam_of(x)), lambda x: x**2 / cfg.params.omega_m
        )
    meta["failed_points"] = sum(1 for q in pts if q.error)
    return ["g0", "lambda", "delta_B", "g2", "population", "error"], rows


def cmd_resonances(cfg: RunConfig, meta: dict):
    if cfg.sweep is not None:
        raise ConfigError("resonances does not take a sweep")
    p = cfg.params
    fr = _frame(p)
    n = cfg.opt("resonances", "n_b_max")
    preds = resonance_predictions(p, fr, grwa_N1(p, fr, max(n, 1)), grwa_N2(p, fr, max(n, 1)), n_b_max=n)
    rows = [{"kind": r.kind, "label": r.label, "delta_B": r.delta_B, "origin": r.origin, "final": r.final}
            for r in preds]
    meta["balanced"] = abs(p.g0 - p.lam) <= 1e-12
    return ["kind", "label", "delta_B", "origin", "final"], rows


def cmd_validate(cfg: RunConfig, meta: dict, full: bool = False):
    from . import acceptance

    chosen = acceptance.ALL if full else tuple(
        f for f in acceptance.ALL if f not in (acceptance.criterion_6, acceptance.criterion_7)
    )
    rows = []
    for fn in chosen:
        kw = {"threads": cfg.threads} if fn in (acceptance.criterion_6, acceptance.criterion_7) else {}
        res = fn(**kw)
        print(res.line(), flush=True)
        rows.append({"criterion": res.number, "title": res.title, "passed": res.passed,
                     "seconds": res.seconds, "detail": res.detail})
    meta["all_passed"] = all(r["passed"] for r in rows)
    return ["criterion", "title", "passed", "seconds", "detail"], rows


# ------------------------------------------------------------------ plumbing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mechpol", description="Polariton-phonon energies, spectra and g2 sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI-style configuration file")
        sp.add_argument("--out", help="output data file (default: stdout)")
        sp.add_argument("--format", choices=FORMATS, default=None)
        sp.add_argument("--threads", type=int, default=None)
        if name in ("energies", "g2-sweep", "g2-coupling-sweep"):
            sp.add_argument("--sweep", nargs=4, metavar=("VAR", "START", "STOP", "STEPS"))
        if name == "energies":
            sp.add_argument("--subspace", type=int)
            sp.add_argument("--n-b-max", type=int)
        if name == "spectrum":
            sp.add_argument("--n0", type=int)
        if name == "validate":
            sp.add_argument("--full", action="store_true", help="include the slow g2 sweeps")
    return ap


def _apply_flags(cfg: RunConfig, args) -> None:
    if args.format:
        cfg.format = args.format
    elif args.out and args.out.endswith(".json"):
        cfg.format = "json"
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg.threads = args.threads
    cfg.out = Path(args.out) if args.out else None
    if getattr(args, "sweep", None):
        var, a, b, n = args.sweep
        try:
            cfg.sweep = Sweep(var, float(a), float(b), int(n))
        except ValueError as exc:
            raise ConfigError(f"bad --sweep: {exc}") from exc
    if getattr(args, "subspace", None) is not None:
        cfg.options["energies"]["subspace"] = args.subspace
    if getattr(args, "n_b_max", None) is not None:
        cfg.options["energies"]["n_b_max"] = args.n_b_max
    if getattr(args, "n0", None) is not None:
        cfg.options["spectrum"]["n0"] = args.n0


def _manifest(cfg: RunConfig, meta: dict, started: float, status: str, code: int, n_rows: int) -> dict:
    params = cfg.params.as_dict()
    params["lambda"] = params.pop("lam")
    return {
        "command": cfg.command,
        "config": cfg.source,
        "params": params,
        "truncation": {"n_pol_max": cfg.trunc.n_pol_max, "n_phonon_max": cfg.trunc.n_phonon_max,
                       "phonon_basis": cfg.phonon_basis},
        "sweep": None if cfg.sweep is None else vars(cfg.sweep),
        "options": cfg.options,
        "threads": cfg.threads,
        "versions": {"artifact": _version(), "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": time.perf_counter() - started,
        "records": n_rows,
        "status": status,
        "exit_code": code,
        **meta,
    }


def _emit(cfg: RunConfig, cols, rows, manifest: dict) -> None:
    if cfg.format == "json":
        text = json.dumps(
            _jsonable({"columns": cols, "records": rows, "manifest": manifest}), indent=1, sort_keys=False
        ) + "\n"
    else:
        text = to_csv(cols, rows)
    if cfg.out is None:
        sys.stdout.write(text)
        return
    atomic_write(cfg.out, text)
    if cfg.format == "csv":
        man = cfg.out.with_name(cfg.out.name + ".manifest.json")
        atomic_write(man, json.dumps(_jsonable(manifest), indent=1) + "\n")


def _error_record(kind: str, exc: BaseException, code: int) -> None:
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}),
          file=sys.stderr)


HANDLERS = {
    "energies": cmd_energies,
    "spectrum": cmd_spectrum,
    "g2-sweep": cmd_g2_sweep,
    "g2-coupling-sweep": cmd_g2_coupling,
    "resonances": cmd_resonances,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    meta: dict = {}
    try:
        cfg = load_config(args.config, args.command)
        _apply_flags(cfg, args)
    except (ConfigError, DegenerateFrameError) as exc:
        _error_record("config", exc, EXIT_CONFIG)
        return EXIT_CONFIG
    try:
        if args.command == "validate":
            cols, rows = cmd_validate(cfg, meta, full=args.full)
            code = EXIT_OK if meta["all_passed"] else EXIT_VALIDATION
            if cfg.out is not None:
                _emit(cfg, cols, rows, _manifest(cfg, meta, started, "ok" if code == 0 else "failed", code, len(rows)))
            return code
        cols, rows = HANDLERS[args.command](cfg, meta)
    except (ConfigError, DegenerateFrameError) as exc:
        _error_record("config", exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        _error_record("numerical", exc, EXIT_NUMERIC)
        if cfg.out is not None:
            m = _manifest(cfg, meta, started, "numerical failure", EXIT_NUMERIC, 0)
            m["error"] = {"type": type(exc).__name__, "message": str(exc)}
            atomic_write(cfg.out.with_name(cfg.out.name + ".manifest.json"), json.dumps(_jsonable(m), indent=1) + "\n")
        return EXIT_NUMERIC
    failed = meta.get("failed_points", 0)
    code = EXIT_PARTIAL if failed else EXIT_OK
    status = f"partial: {failed} of {len(rows)} points failed" if failed else "ok"
    _emit(cfg, cols, rows, _manifest(cfg, meta, started, status, code, len(rows)))
    if failed:
        print(json.dumps({"error": "partial sweep", "failed_points": failed, "exit_code": code}), file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
