"""Run configuration: INI-style sections, strict keys, everything in units of omega_m."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from .params import SystemParams, TruncationSpec

COMMANDS = ("energies", "spectrum", "g2-sweep", "g2-coupling-sweep", "resonances", "validate")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


# config key -> SystemParams field
SYSTEM_KEYS = {f.name: f.name for f in fields(SystemParams) if f.name not in ("lam", "omega_m")}
SYSTEM_KEYS["lambda"] = "lam"

SECTION_KEYS = {
    "system": set(SYSTEM_KEYS) | {"omega_m"},
    "truncation": {"n_pol_max", "n_phonon_max", "phonon_basis"},
    "sweep": {"variable", "start", "stop", "steps"},
    "energies": {"subspace", "n_b_max", "exact_phonon_max"},
    "spectrum": {"n0", "n_b_max", "points", "omega_min", "omega_max"},
    "coupling": {"lambda_mode", "lambda_ratio"},
    "resonances": {"n_b_max"},
    "certify": {"enabled"},
}

DEFAULT_OPTIONS = {
    "energies": {"subspace": 1, "n_b_max": 4, "exact_phonon_max": 12},
    "spectrum": {"n0": 2, "n_b_max": 6, "points": 1201, "omega_min": -8.0, "omega_max": 3.0},
    "coupling": {"lambda_mode": "balanced", "lambda_ratio": 1.0},
    "resonances": {"n_b_max": 3},
    "certify": {"enabled": False},
}

INT_KEYS = {"subspace", "n_b_max", "exact_phonon_max", "n0", "points", "steps", "n_pol_max", "n_phonon_max"}
STR_KEYS = {"variable", "lambda_mode", "phonon_basis"}
BOOL_KEYS = {"enabled"}


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ConfigError("sweep steps must be >= 2")
        if self.start == self.stop:
            raise ConfigError("sweep start and stop must differ")

    def values(self):
        import numpy as np

        return np.linspace(self.start, self.stop, self.steps)


@dataclass
class RunConfig:
    command: str
    params: SystemParams = field(default_factory=SystemParams)
    trunc: TruncationSpec = field(default_factory=TruncationSpec)
    phonon_basis: str = "displaced"
    sweep: Sweep | None = None
    out: Path | None = None
    format: str = "csv"
    threads: int = 1
    options: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_OPTIONS.items()})
    source: str | None = None

    def opt(self, section: str, key: str):
        return self.options[section][key]


def _convert(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in INT_KEYS:
            return int(raw)
        if key in BOOL_KEYS:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if key in STR_KEYS:
            return raw
        return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def parse_config_text(text: str, command: str, source: str | None = None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case so typos are not normalized away
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    cfg = RunConfig(command=command, source=source)
    sys_kw = {}
    trunc_kw = {}
    sweep_kw = {}
    for section in cp.sections():
        if section not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SECTION_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            if section == "system":
                val = _convert(key, raw)
                if key == "omega_m":
                    if val != 1.0:
                        raise ConfigError("omega_m is the unit and must be 1")
                    continue
                sys_kw[SYSTEM_KEYS[key]] = val
            elif section == "truncation":
                if key == "phonon_basis":
                    cfg.phonon_basis = _convert(key, raw)
                else:
                    trunc_kw[key] = _convert(key, raw)
            elif section == "sweep":
                sweep_kw[key] = _convert(key, raw)
            else:
                cfg.options[section][key] = _convert(key, raw)
    try:
        cfg.params = SystemParams(**sys_kw)
        cfg.trunc = TruncationSpec(**trunc_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.phonon_basis not in ("fock", "displaced"):
        raise ConfigError(f"phonon_basis must be 'fock' or 'displaced', got {cfg.phonon_basis!r}")
    if sweep_kw:
        missing = {"variable", "start", "stop", "steps"} - set(sweep_kw)
        if missing:
            raise ConfigError(f"[sweep] is missing {sorted(missing)}")
        cfg.sweep = Sweep(**sweep_kw)
    if cfg.options["coupling"]["lambda_mode"] not in ("balanced", "fixed", "ratio"):
        raise ConfigError("lambda_mode must be balanced, fixed or ratio")
    return cfg


def load_config(path: str | Path | None, command: str) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if path is None:
        return RunConfig(command=command)
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config_text(text, command, str(p))


def sweep_target(variable: str) -> str:
    """Map a sweep variable name to the SystemParams field it changes."""
    if variable in ("delta_B",):
        return variable
    if variable in SYSTEM_KEYS:
        return SYSTEM_KEYS[variable]
    raise ConfigError(f"cannot sweep {variable!r}")
