"""Flat ``section.key = value`` run configuration.

Blank lines and lines starting with ``#`` are ignored.  Every key has a
default; see ``KEYS`` for the full list.  Per-slit overrides use
``slit.<j>.<field>`` with j counted from 1.  Parsing collects every problem
before failing, each tagged with its line number.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from .core import ExperimentConfig, ModelConstants, SlitPacket
from .dynamics import EnsembleSpec, IntegratorSpec
from .nosignal import InterventionSpec
from .relativity import Apparatus, Boost, Event


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _positive(v):
    return None if v > 0 else "must be > 0"


def _at_least(n):
    return lambda v: None if v >= n else f"must be >= {n}"


def _one_of(*choices):
    return lambda v: None if v in choices else f"must be one of {', '.join(choices)}"


def _speed(v):
    return None if abs(v) < 1 else "must satisfy |beta| < 1"


def _speeds(vs):
    return None if all(abs(v) < 1 for v in vs) else "every beta must satisfy |beta| < 1"


def _seed(v):
    return None if 0 <= v < 2**64 else "must be a 64-bit unsigned integer"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


# key: (type, default, check)
KEYS = {
    "constants.hbar": (float, 1.0, _positive),
    "constants.mass": (float, 1.0, _positive),
    "slits.count": (int, 2, _at_least(1)),
    "slits.separation": (float, 5.0, _positive),
    "slit.sigma0": (float, 0.5, _positive),
    "slit.velocity": (float, 0.0, None),
    "slit.phase": (float, 0.0, None),
    "domain.x_min": (float, -30.0, None),
    "domain.x_max": (float, 30.0, None),
    "grid.nx": (int, 401, _at_least(2)),
    "grid.nt": (int, 51, _at_least(1)),
    "grid.t_min": (float, 0.0, _nonneg),
    "grid.t_max": (float, 10.0, _nonneg),
    "grid.h": (float, 1e-4, _positive),
    "integrator.dt": (float, 1e-3, _positive),
    "integrator.t_start": (float, 0.0, _nonneg),
    "integrator.t_end": (float, 10.0, _nonneg),
    "integrator.record_every": (int, 100, _at_least(1)),
    "ensemble.count": (int, 200, _at_least(1)),
    "ensemble.sampling": (str, "stratified", _one_of("stratified", "iid")),
    "ensemble.positions": ("floats", None, None),
    "ensemble.bins": (int, 60, _at_least(1)),
    "intervention.mode": (str, "random", _one_of("random", "fixed")),
    "intervention.chi": (float, 0.0, None),
    "intervention.runs": (int, 100000, _at_least(1)),
    "intervention.t": (float, 10.0, _nonneg),
    "intervention.bins": (int, 32, _at_least(1)),
    "intervention.threshold": (float, 0.02, _positive),
    "intervention.trajectory_check": (bool, False, None),
    "epr.source_t": (float, 0.0, _nonneg),
    "epr.source_x": (float, 0.0, None),
    "epr.detector_left": (float, -4.0, None),
    "epr.detector_right": (float, 4.0, None),
    "epr.rest_beta": (float, 0.0, _speed),
    "epr.betas": ("floats", tuple(round(-0.9 + 0.1 * i, 10) for i in range(19)), _speeds),
    "run.seed": (int, 20161031, _seed),
    "output.format": (str, "csv", _one_of("csv", "json")),
}

SLIT_FIELDS = {
    "center": (float, None),
    "sigma0": (float, _positive),
    "velocity": (float, None),
    "phase": (float, None),
}

_SLIT_KEY = re.compile(r"^slit\.(\d+)\.(\w+)$")
_LINE = re.compile(r"^([A-Za-z_][\w.]*)\s*=\s*(.*)$")


def _convert(kind, raw: str):
    raw = raw.strip()
    if kind is float:
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError
        return v
    if kind is int:
        if not re.fullmatch(r"[+-]?\d+", raw):
            raise ValueError
        return int(raw)
    if kind is bool:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError
    if kind == "floats":
        if not raw:
            return ()
        return tuple(_convert(float, p) for p in raw.split(","))
    return raw


_TYPE_NAMES = {float: "number", int: "integer", bool: "boolean", str: "string", "floats": "comma-separated numbers"}


@dataclass(frozen=True)
class GridSpec:
    nx: int = 401
    nt: int = 51
    t_min: float = 0.0
    t_max: float = 10.0
    h: float = 1e-4


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig
    grid: GridSpec
    integrator: IntegratorSpec
    ensemble: EnsembleSpec
    intervention: InterventionSpec
    intervention_runs: int
    intervention_t: float
    intervention_bins: int
    intervention_threshold: float
    trajectory_check: bool
    apparatus: Apparatus
    betas: tuple[float, ...]
    seed: int
    format: str
    values: dict = field(default_factory=dict, repr=False)

    def with_seed(self, seed: int) -> "RunConfig":
        if _seed(seed):
            raise ConfigError([f"--seed: {_seed(seed)} (got {seed})"])
        return replace(self, seed=seed,
                       ensemble=replace(self.ensemble, seed=seed),
                       intervention=replace(self.intervention, seed=seed))


def _render(v):
    if isinstance(v, tuple):
        return ", ".join(repr(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; raise ConfigError listing every problem."""
    errors: list[str] = []
    values: dict = {}
    lines: dict[str, int] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.match(stripped)
        if not m:
            errors.append(f"line {lineno}: expected 'section.key = value', got {stripped!r}")
            continue
        key, raw = m.group(1), m.group(2)
        raw = raw.split(" #", 1)[0]
        if key in lines:
            errors.append(f"line {lineno}: duplicate key {key!r} (lines {lines[key]} and {lineno})")
            continue
        slit = _SLIT_KEY.match(key)
        if key in KEYS:
            kind, _, check = KEYS[key]
        elif slit and slit.group(2) in SLIT_FIELDS:
            kind, check = SLIT_FIELDS[slit.group(2)]
        else:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        lines[key] = lineno
        try:
            value = _convert(kind, raw)
        except ValueError:
            errors.append(f"line {lineno}: {key}: expected {_TYPE_NAMES[kind]}, got {raw.strip()!r}")
            continue
        problem = check(value) if check else None
        if problem:
            errors.append(f"line {lineno}: {key}: {problem} (got {raw.strip()})")
            continue
        values[key] = value

    def get(key):
        return values.get(key, KEYS[key][1])

    def where(*keys):
        found = [f"line {lines[k]}" for k in keys if k in lines]
        return ", ".join(found) if found else "defaults"

    def require(ok, msg, *keys):
        if not ok:
            errors.append(f"{where(*keys)}: {msg}")
        return ok

    count = get("slits.count")
    for key in values:
        m = _SLIT_KEY.match(key)
        if m and not 1 <= int(m.group(1)) <= count:
            errors.append(f"line {lines[key]}: {key}: slit index out of range 1..{count}")
    require(get("domain.x_min") < get("domain.x_max"), "domain.x_min must be < domain.x_max",
            "domain.x_min", "domain.x_max")
    require(get("grid.t_min") <= get("grid.t_max"), "grid.t_min must be <= grid.t_max",
            "grid.t_min", "grid.t_max")
    require(get("integrator.t_start") < get("integrator.t_end"),
            "integrator.t_start must be < integrator.t_end",
            "integrator.t_start", "integrator.t_end")
    require(get("epr.detector_left") < get("epr.source_x") < get("epr.detector_right"),
            "need epr.detector_left < epr.source_x < epr.detector_right",
            "epr.detector_left", "epr.source_x", "epr.detector_right")
    positions = get("ensemble.positions")
    if positions is not None:
        require(len(positions) > 0, "ensemble.positions must not be empty", "ensemble.positions")

    slits = []
    sep = get("slits.separation")
    for j in range(1, count + 1):
        def slit_value(name, default):
            return values.get(f"slit.{j}.{name}", default)
        center = slit_value("center", (j - (count + 1) / 2) * sep)
        slits.append(SlitPacket(center, slit_value("velocity", get("slit.velocity")),
                                slit_value("sigma0", get("slit.sigma0")),
                                slit_value("phase", get("slit.phase"))))
    centers = [s.center for s in slits]
    require(len(set(centers)) == len(centers), "slit centers must be pairwise distinct",
            *[f"slit.{j}.center" for j in range(1, count + 1)], "slits.separation")

    if errors:
        raise ConfigError(errors)

    seed = get("run.seed")
    experiment = ExperimentConfig(
        tuple(slits), ModelConstants(get("constants.hbar"), get("constants.mass")),
        get("domain.x_min"), get("domain.x_max"))
    return RunConfig(
        experiment=experiment,
        grid=GridSpec(get("grid.nx"), get("grid.nt"), get("grid.t_min"), get("grid.t_max"),
                      get("grid.h")),
        integrator=IntegratorSpec(get("integrator.dt"), get("integrator.t_start"),
                                  get("integrator.t_end"), get("integrator.record_every")),
        ensemble=EnsembleSpec(get("ensemble.count"), seed, get("ensemble.sampling"),
                              positions, get("ensemble.bins")),
        intervention=InterventionSpec(get("intervention.mode"), get("intervention.chi"), seed),
        intervention_runs=get("intervention.runs"),
        intervention_t=get("intervention.t"),
        intervention_bins=get("intervention.bins"),
        intervention_threshold=get("intervention.threshold"),
        trajectory_check=get("intervention.trajectory_check"),
        apparatus=Apparatus(Event(get("epr.source_t"), get("epr.source_x")),
                            get("epr.detector_left"), get("epr.detector_right"),
                            Boost(get("epr.rest_beta"))),
        betas=tuple(get("epr.betas")),
        seed=seed,
        format=get("output.format"),
        values=dict(values),
    )


def default_config_text() -> str:
    """All keys with their defaults, one per line."""
    out = []
    for key, (kind, default, _) in KEYS.items():
        if default is None:
            out.append(f"# {key} =")
        else:
            out.append(f"{key} = {_render(default)}")
    return "\n".join(out) + "\n"

