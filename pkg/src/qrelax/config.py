"""Run configuration: a flat dataclass fed by a key=value file and CLI flags."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional

from . import constants as C
from .core import ConfigError

MODES = ("goe", "boson", "oscillator", "external")
ALIASES = {"lambda": "lam", "format": "fmt", "tol": "tolerances"}


@dataclass(frozen=True)
class InitialSelector:
    """Initial basis states either by index or by nearest observable value."""

    kind: str = "q"
    values: tuple = (-1.5,)

    @classmethod
    def parse(cls, text: str) -> "InitialSelector":
        if ":" not in str(text):
            raise ConfigError(f"initial selector {text!r} must look like index:K or q:VALUE")
        kind, _, rest = str(text).partition(":")
        kind = kind.strip().lower()
        items = [s.strip() for s in rest.split(",") if s.strip()]
        if not items:
            raise ConfigError(f"initial selector {text!r} has no values")
        try:
            if kind == "index":
                vals = tuple(int(s) for s in items)
            elif kind == "q":
                vals = tuple(float(s) for s in items)
            else:
                raise ConfigError(f"unknown initial selector kind {kind!r}")
        except ValueError as exc:
            raise ConfigError(f"bad initial selector {text!r}: {exc}") from exc
        return cls(kind, vals)

    def __str__(self) -> str:
        return f"{self.kind}:" + ",".join(str(v) for v in self.values)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    tau_max: float = 10.0
    tau_steps: int = 1001
    seed: int = C.DEFAULT_SEED
    out: str = "run.csv"
    fmt: str = "csv"
    deterministic: bool = False
    debug: bool = False
    # goe
    dim: int = 2000
    lam: float = 1.0
    realizations: int = 1
    initial: InitialSelector = field(default_factory=InitialSelector)
    # boson
    n_bosons: int = 6
    n_levels: int = 11
    v: float = 1.0
    # oscillator
    alpha: complex = 1.0
    omega: float = 1.0
    n_max: Optional[int] = None
    squeeze_position: Optional[float] = None
    # external
    hamiltonian_file: Optional[str] = None
    observable_file: Optional[str] = None
    hist_tau: tuple = (0.5, 1.0, 2.0)
    export_hamiltonian: Optional[str] = None
    export_observable: Optional[str] = None
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.tau_steps) < 2:
            raise ConfigError("tau_steps must be >= 2")
        if not float(self.tau_max) > 0:
            raise ConfigError("tau_max must be positive")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if int(self.dim) < 2:
            raise ConfigError("dim must be >= 2")
        if not float(self.lam) > 0 or not float(self.omega) > 0:
            raise ConfigError("lambda and omega must be positive")
        if int(self.realizations) < 1:
            raise ConfigError("realizations must be >= 1")
        if int(self.n_bosons) < 1 or int(self.n_levels) < 1:
            raise ConfigError("n_bosons and n_levels must be >= 1")
        if self.mode == "external" and not self.hamiltonian_file:
            raise ConfigError("external mode needs --hamiltonian-file")
        try:
            C.resolve_tolerances(self.tolerances)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        bad = [k for k, v in self.tolerances.items() if not float(v) > 0]
        if bad:
            raise ConfigError(f"tolerances must be positive: {bad}")


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if name in ("tau_steps", "seed", "dim", "realizations", "n_bosons", "n_levels", "n_max"):
            return int(text)
        if name in ("tau_max", "lam", "v", "omega", "squeeze_position"):
            return float(text)
        if name == "alpha":
            return complex(text.replace(" ", ""))
        if name in ("deterministic", "debug"):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if name == "initial":
            return InitialSelector.parse(text)
        if name == "hist_tau":
            return tuple(float(s) for s in text.split(",") if s.strip())
        if name == "tolerances":
            return parse_tolerances(text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from exc
    return text


def parse_tolerances(items) -> dict:
    out = {}
    for item in items or ():
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"tolerance override {item!r} must be name=value")
        try:
            out[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"tolerance {key!r}: {exc}") from exc
    return out


def read_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment; dashes in keys become underscores."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key = key.strip().replace("-", "_")
        out[ALIASES.get(key, key)] = value.strip()
    return out


def build_config(mode: str, file_values: Optional[dict] = None, flag_values: Optional[dict] = None) -> RunConfig:
    """Config-file values over defaults, command-line flags over both."""
    known = {f.name for f in fields(RunConfig)}
    merged = {}
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in known or key == "mode":
                raise ConfigError(f"unknown configuration key {key!r}")
            merged[key] = _coerce(key, value)
    if "tolerances" in (file_values or {}) and "tolerances" in (flag_values or {}):
        tol = dict(_coerce("tolerances", file_values["tolerances"]))
        tol.update(_coerce("tolerances", flag_values["tolerances"]))
        merged["tolerances"] = tol
    return RunConfig(mode=mode, **merged)
