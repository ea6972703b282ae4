"""Run configuration, parameter sweeps and table output.

A run is described by flat dotted keys (``crystal.n``, ``atoms.gamma``,
``sweep.points`` ...). Values come from built-in defaults, then an optional
JSON file, then command-line flags. Each sweep point is evaluated
independently and rows are assembled in sweep order, so serial and parallel
runs produce identical tables.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__
from .band_structure import BandStructure, CrystalSpec, band_structure, dispersion, dos, effective_mass
from .electronic import WireModel, electronic_force, kappa0, solve_electronic_pole
from .errors import BandgapResonanceError, FarZoneWarning
from .forces import (
    energy_shift,
    enhancement_ratio,
    evaluate,
    force,
    inferred_linewidth_1d,
    vacuum_energy_shift,
)
from .units import coupling_from_debye
from .resolvent import (
    AtomPairConfig,
    pole_integral_1d,
    pole_integral_1d_quadrature,
    pole_integral_3d,
    pole_integral_3d_quadrature,
    solve_pole,
)

DEFAULT_DIPOLE_SQ = coupling_from_debye(1.0)

COMMANDS = ("bands", "dos", "integral", "energy", "force", "compare", "electronic")
SWEEP_VARS = ("separation", "detuning", "gamma", "impurity_energy", "wavenumber", "frequency")
ALLOWED_VARS = {
    "bands": ("wavenumber",),
    "dos": ("frequency",),
    "integral": ("separation", "detuning"),
    "energy": ("separation", "detuning", "gamma"),
    "force": ("separation", "detuning", "gamma"),
    "compare": ("gamma", "detuning"),
    "electronic": ("separation", "impurity_energy"),
}
SWEEP_UNITS = {
    "separation": "m",
    "detuning": "rad/s",
    "gamma": "rad/s",
    "impurity_energy": "reduced",
    "wavenumber": "rad/m",
    "frequency": "rad/s",
}


class ConfigError(BandgapResonanceError, ValueError):
    """The run configuration is invalid."""


@dataclass(frozen=True)
class CrystalParams:
    n: float = 2.0
    a: float = 1e-7


@dataclass(frozen=True)
class BandParams:
    """Explicit band parameters; when ``omega_c`` is set they replace the crystal."""

    omega_v: float | None = None
    omega_c: float | None = None
    k0: float | None = None
    curvature: float | None = None


@dataclass(frozen=True)
class AtomParams:
    omega_i: float | None = None
    detuning: float | None = None
    gamma: float = 0.0
    # |mu|^2/hbar for a 1 debye transition dipole (m^3/s)
    dipole_sq: float = DEFAULT_DIPOLE_SQ
    dipole: tuple = (0.0, 0.0, 1.0)
    axis: tuple = (1.0, 0.0, 0.0)
    separation: float = 1e-5
    dims: int = 3


@dataclass(frozen=True)
class WireParams:
    e0: float = 0.0
    b: float = 1.0
    g: float = 0.1
    parity: str = "symmetric"
    x: float = 10.0


@dataclass(frozen=True)
class SweepParams:
    var: str | None = None
    start: float | None = None
    stop: float | None = None
    points: int | None = None
    log: bool = False


@dataclass(frozen=True)
class OutputParams:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class TolParams:
    rel: float = 1e-10


@dataclass(frozen=True)
class RunConfig:
    command: str
    crystal: CrystalParams = field(default_factory=CrystalParams)
    bands: BandParams = field(default_factory=BandParams)
    atoms: AtomParams = field(default_factory=AtomParams)
    wire: WireParams = field(default_factory=WireParams)
    sweep: SweepParams = field(default_factory=SweepParams)
    output: OutputParams = field(default_factory=OutputParams)
    tol: TolParams = field(default_factory=TolParams)

    # -- flat-key round trip -------------------------------------------------
    def to_flat(self) -> dict:
        out = {"command": self.command}
        for sec in fields(self):
            if sec.name == "command":
                continue
            group = getattr(self, sec.name)
            for f in fields(group):
                value = getattr(group, f.name)
                out[f"{sec.name}.{f.name}"] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_flat(cls, flat: dict) -> "RunConfig":
        flat = dict(flat)
        command = flat.pop("command", None)
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
        groups = {}
        sections = {f.name: f for f in fields(cls) if f.name != "command"}
        for key, value in flat.items():
            sec, _, name = key.partition(".")
            if sec not in sections:
                raise ConfigError(f"unknown config key {key!r}")
            groups.setdefault(sec, {})[name] = value
        kwargs = {}
        for sec, f in sections.items():
            group_cls = f.default_factory
            known = {g.name: g for g in fields(group_cls)}
            values = {}
            for name, value in groups.get(sec, {}).items():
                if name not in known:
                    raise ConfigError(f"unknown config key {sec}.{name!r}")
                values[name] = _coerce(f"{sec}.{name}", value, known[name])
            kwargs[sec] = group_cls(**values)
        cfg = cls(command, **kwargs)
        cfg.validate()
        return cfg

    def override(self, flat: dict) -> "RunConfig":
        merged = self.to_flat()
        merged.update(flat)
        return RunConfig.from_flat(merged)

    # -- validation ------------------------------------------------------------
    def validate(self):
        s = self.sweep
        if s.var is not None:
            if s.var not in SWEEP_VARS:
                raise ConfigError(f"unknown sweep variable {s.var!r}; choose from {', '.join(SWEEP_VARS)}")
            if s.var not in ALLOWED_VARS[self.command]:
                raise ConfigError(
                    f"command {self.command!r} sweeps {', '.join(ALLOWED_VARS[self.command])}, not {s.var!r}"
                )
            if s.start is None or s.stop is None or s.points is None:
                raise ConfigError("a sweep needs sweep.start, sweep.stop and sweep.points")
        if self.output.format not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json (got {self.output.format!r})")
        if self.atoms.dims not in (1, 3):
            raise ConfigError(f"atoms.dims must be 1 or 3 (got {self.atoms.dims})")
        if self.atoms.omega_i is not None and self.atoms.detuning is not None:
            raise ConfigError("give atoms.omega_i or atoms.detuning, not both")
        if self.wire.parity not in ("symmetric", "antisymmetric"):
            raise ConfigError(f"wire.parity must be symmetric or antisymmetric (got {self.wire.parity!r})")
        b = self.bands
        explicit = [b.omega_v, b.omega_c, b.k0, b.curvature]
        if any(v is not None for v in explicit) and not all(v is not None for v in explicit):
            raise ConfigError("explicit bands need bands.omega_v, bands.omega_c, bands.k0 and bands.curvature")
        if not 0 < self.tol.rel < 1:
            raise ConfigError(f"tol.rel must lie in (0, 1) (got {self.tol.rel})")
        try:
            self.band_structure()
            if self.command in ("integral", "energy", "force", "compare") and s.var not in ("detuning",):
                self.atom_pair()
            r = resolved_sweep(self)
        except BandgapResonanceError as exc:
            raise ConfigError(str(exc)) from exc
        if r.points < 2:
            raise ConfigError(f"sweep.points must be at least 2 (got {r.points})")
        if not r.start < r.stop:
            raise ConfigError(f"sweep.start must be below sweep.stop (got {r.start}, {r.stop})")
        if r.log and not r.start > 0:
            raise ConfigError("log spacing needs sweep.start > 0")

    # -- model objects --------------------------------------------------------
    def crystal_spec(self) -> CrystalSpec:
        return CrystalSpec(self.crystal.n, self.crystal.a)

    def band_structure(self) -> BandStructure:
        b = self.bands
        if b.omega_c is not None:
            return BandStructure(b.omega_v, b.omega_c, b.k0, b.curvature)
        return band_structure(self.crystal_spec())

    def atom_pair(self, bands: BandStructure | None = None) -> AtomPairConfig:
        a = self.atoms
        if a.omega_i is not None:
            omega_i = a.omega_i
        else:
            bands = bands or self.band_structure()
            omega_i = bands.omega_c + (a.detuning if a.detuning is not None else 1e-5 * bands.omega_c)
        return AtomPairConfig(omega_i, a.separation, a.gamma, a.dipole_sq, a.dipole, a.axis, a.dims)

    def wire_model(self) -> WireModel:
        w = self.wire
        return WireModel(w.e0, w.b, w.g, w.parity, w.x)


def _coerce(key, value, f):
    name = f.name
    if value is None:
        return None
    try:
        if name in ("dipole", "axis"):
            if isinstance(value, str):
                value = value.split(",")
            out = tuple(float(v) for v in value)
            if len(out) != 3:
                raise ValueError("need three components")
            return out
        if name in ("points", "dims"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError("not an integer")
            return int(value)
        if name == "log":
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError("not a boolean")
                return value.lower() in ("true", "1")
            return bool(value)
        if name in ("var", "path", "format", "parity"):
            return str(value)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object of dotted keys")
    return data


# -- sweeps ------------------------------------------------------------------------


def _default_sweep(cfg: RunConfig) -> SweepParams:
    cmd = cfg.command
    if cmd == "bands":
        spec = cfg.crystal_spec()
        return SweepParams("wavenumber", 0.0, math.pi / spec.period, 51, False)
    bands = cfg.band_structure()
    if cmd == "dos":
        gap = bands.gap
        return SweepParams("frequency", bands.omega_v - 0.25 * gap, bands.omega_c + 0.25 * gap, 51, False)
    if cmd == "integral":
        return SweepParams("separation", 20 / bands.k0, 100 / bands.k0, 9, False)
    if cmd in ("energy", "force"):
        return SweepParams("separation", 10 / bands.k0, 200 / bands.k0, 50, False)
    if cmd == "compare":
        return SweepParams("gamma", 1e10, 1e12, 9, True)
    return SweepParams("separation", 2.0, 40.0, 77, False)


def resolved_sweep(cfg: RunConfig) -> SweepParams:
    """The configured sweep; without ``sweep.var`` the command default, with any given fields applied."""
    s = cfg.sweep
    if s.var is not None:
        return s
    d = _default_sweep(cfg)
    return SweepParams(
        d.var,
        d.start if s.start is None else s.start,
        d.stop if s.stop is None else s.stop,
        d.points if s.points is None else s.points,
        s.log or d.log,
    )


def sweep_values(s: SweepParams) -> np.ndarray:
    if s.log:
        return np.geomspace(s.start, s.stop, s.points)
    return np.linspace(s.start, s.stop, s.points)


def _with_value(cfg: RunConfig, var: str, value: float) -> RunConfig:
    if var == "separation":
        return replace(cfg, atoms=replace(cfg.atoms, separation=value), wire=replace(cfg.wire, x=value))
    if var == "detuning":
        return replace(cfg, atoms=replace(cfg.atoms, detuning=value, omega_i=None))
    if var == "gamma":
        return replace(cfg, atoms=replace(cfg.atoms, gamma=value))
    if var == "impurity_energy":
        return replace(cfg, wire=replace(cfg.wire, e0=value))
    return cfg


# Column tables: name -> (unit, function(cfg, value)). Functions raise on failure.


def _bands_columns(cfg):
    spec = cfg.crystal_spec()
    return {
        "omega_lower": ("rad/s", lambda c, k: dispersion(k, spec, 1)),
        "omega_upper": ("rad/s", lambda c, k: dispersion(k, spec, 2)),
    }


def _dos_columns(cfg):
    bands = cfg.band_structure()
    return {"dos": ("s/m^3", lambda c, w: dos(w, bands))}


@functools.lru_cache(maxsize=64)
def _cached_quadrature(quad, zeta, sep, bands, rel):
    return quad(zeta, sep, bands, rel)


def _integral_columns(cfg):
    bands = cfg.band_structure()
    dims = cfg.atoms.dims
    closed = pole_integral_3d if dims == 3 else pole_integral_1d
    quad = pole_integral_3d_quadrature if dims == 3 else pole_integral_1d_quadrature
    unit = "1/m" if dims == 3 else "reduced"

    def zeta(c):
        return c.atom_pair(bands).omega_i

    def sep(c):
        return c.atoms.separation

    def oracle(c):
        return _cached_quadrature(quad, zeta(c), sep(c), bands, c.tol.rel)

    def rel_diff(c, _):
        a = closed(zeta(c), sep(c), bands, "closed")
        b = oracle(c).value
        return abs(a - b) / abs(b)

    return {
        "closed": (unit, lambda c, _: closed(zeta(c), sep(c), bands, "closed")),
        "quadrature": (unit, lambda c, _: oracle(c).value),
        "quadrature_error": (unit, lambda c, _: oracle(c).error),
        "near_edge": (unit, lambda c, _: closed(zeta(c), sep(c), bands, "near_edge")),
        "relative_difference": ("1", rel_diff),
    }


def _energy_columns(cfg):
    bands = cfg.band_structure()
    return {
        "energy_shift": ("rad/s", lambda c, _: energy_shift(c.atom_pair(bands), bands)),
        "energy_shift_regularized": ("rad/s", lambda c, _: energy_shift(c.atom_pair(bands), bands, True)),
        "vacuum_energy_shift": ("rad/s", lambda c, _: vacuum_energy_shift(c.atom_pair(bands))),
        "pole_shift_fixed_point": (
            "rad/s",
            lambda c, _: solve_pole(c.atom_pair(bands), bands, "fixed_point").shift,
        ),
    }


def _force_columns(cfg):
    bands = cfg.band_structure()

    def ev(c, regularized=False):
        return evaluate(c.atom_pair(bands), bands, regularized)

    return {
        "force": ("rad/s/m", lambda c, _: force(c.atom_pair(bands), bands)),
        "force_regularized": ("rad/s/m", lambda c, _: force(c.atom_pair(bands), bands, True)),
        "vacuum_force": ("rad/s/m", lambda c, _: ev(c, True).vacuum_force),
        "force_ratio": ("1", lambda c, _: ev(c).enhancement_ratio),
        "far_zone_ok": ("flag", lambda c, _: float(ev(c, True).far_zone_ok)),
        "edge_proximity": ("1", lambda c, _: ev(c, True).edge_proximity),
    }


def _compare_columns(cfg):
    bands = cfg.band_structure()
    return {
        "ratio_3d": ("1", lambda c, _: enhancement_ratio(c.atom_pair(bands), bands, 3)),
        "ratio_1d": ("1", lambda c, _: enhancement_ratio(c.atom_pair(bands), bands, 1)),
    }


def _electronic_columns(cfg):
    def wm(c, parity):
        w = c.wire
        return WireModel(w.e0, w.b, w.g, parity, w.x)

    return {
        "kappa0": ("rad", lambda c, _: kappa0(c.wire.e0, c.wire.b)),
        "shift_symmetric": ("reduced", lambda c, _: solve_electronic_pole(wm(c, "symmetric")).shift),
        "shift_antisymmetric": ("reduced", lambda c, _: solve_electronic_pole(wm(c, "antisymmetric")).shift),
        "force_symmetric": ("reduced", lambda c, _: electronic_force(wm(c, "symmetric"))),
        "force_antisymmetric": ("reduced", lambda c, _: electronic_force(wm(c, "antisymmetric"))),
    }


_COLUMN_TABLES = {
    "bands": _bands_columns,
    "dos": _dos_columns,
    "integral": _integral_columns,
    "energy": _energy_columns,
    "force": _force_columns,
    "compare": _compare_columns,
    "electronic": _electronic_columns,
}


def columns(cfg: RunConfig) -> dict:
    return _COLUMN_TABLES[cfg.command](cfg)


def compute_row(cfg: RunConfig, value: float) -> tuple[list[float], str]:
    """Evaluate every column at one sweep value; failures become NaN plus a message."""
    var = resolved_sweep(cfg).var
    point = _with_value(cfg, var, float(value))
    out = []
    errors = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FarZoneWarning)
        for name, (_, fn) in columns(cfg).items():
            try:
                out.append(float(fn(point, float(value))))
            except (BandgapResonanceError, ArithmeticError, ValueError) as exc:
                out.append(math.nan)
                errors.append(f"{name}: {exc}")
    return out, "; ".join(errors)


def _compute_chunk(args):
    cfg, values = args
    return [compute_row(cfg, v) for v in values]


def _metadata(cfg: RunConfig) -> dict:
    meta = {}
    try:
        bands = cfg.band_structure()
    except BandgapResonanceError:
        return meta
    meta.update(omega_v=bands.omega_v, omega_c=bands.omega_c, k0=bands.k0, curvature=bands.curvature)
    if cfg.bands.omega_c is None:
        meta["curvature_lower"] = effective_mass(cfg.crystal_spec(), "lower")
        meta["period"] = cfg.crystal_spec().period
    if cfg.command == "compare":
        omega_i = cfg.atom_pair(bands).omega_i
        meta["inferred_gamma_1d"] = inferred_linewidth_1d(bands, omega_i)
    return meta


@dataclass(frozen=True)
class SweepResult:
    """Tabulated sweep: column names with units, rows, per-row error text and metadata."""

    config: RunConfig
    sweep: SweepParams
    names: tuple
    units: tuple
    rows: tuple
    errors: tuple
    meta: dict

    @property
    def failed(self) -> int:
        return sum(1 for e in self.errors if e)

    @property
    def exit_status(self) -> int:
        if self.failed == 0:
            return 0
        return 3 if self.failed == len(self.rows) else 2


def run(cfg: RunConfig, threads: int | None = None) -> SweepResult:
    """Evaluate the configured sweep.

    ``threads`` is the number of worker processes (default: all cores);
    ``1`` runs in the calling process. Row order never depends on it.
    """
    sweep = resolved_sweep(cfg)
    values = sweep_values(sweep)
    cols = columns(cfg)
    names = (sweep.var,) + tuple(cols)
    sweep_unit = "lattice" if cfg.command == "electronic" and sweep.var == "separation" else SWEEP_UNITS[sweep.var]
    units = (sweep_unit,) + tuple(u for u, _ in cols.values())
    workers = threads or os.cpu_count() or 1
    workers = max(1, min(workers, len(values)))
    if workers == 1:
        results = _compute_chunk((cfg, values))
    else:
        chunks = [(cfg, part) for part in np.array_split(values, workers) if len(part)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [row for chunk in pool.map(_compute_chunk, chunks) for row in chunk]
    rows = tuple((float(v),) + tuple(r) for v, (r, _) in zip(values, results))
    errors = tuple(e for _, e in results)
    return SweepResult(cfg, sweep, names, units, rows, errors, _metadata(cfg))


# -- serialisation -----------------------------------------------------------------


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(f"# bandgap-resonance {__version__}\n")
    buf.write(f"# config: {json.dumps(result.config.to_flat(), sort_keys=True)}\n")
    for key, value in result.meta.items():
        buf.write(f"# {key}: {_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{n} [{u}]" for n, u in zip(result.names, result.units)] + ["error"])
    for row, err in zip(result.rows, result.errors):
        writer.writerow([_fmt(v) for v in row] + [err])
    return buf.getvalue()


def _json_num(x):
    return None if math.isnan(x) or math.isinf(x) else x


def to_json(result: SweepResult) -> str:
    meta = {
        "version": __version__,
        "config": result.config.to_flat(),
        "units": dict(zip(result.names, result.units)),
        **{k: _json_num(v) for k, v in result.meta.items()},
    }
    rows = []
    for row, err in zip(result.rows, result.errors):
        rec = {n: _json_num(v) for n, v in zip(result.names, row)}
        rec["error"] = err
        rows.append(rec)
    return json.dumps({"meta": meta, "rows": rows}, indent=1, allow_nan=False) + "\n"


def render(result: SweepResult) -> str:
    return to_json(result) if result.config.output.format == "json" else to_csv(result)


def config_from_header(text: str) -> RunConfig:
    """Rebuild the run configuration echoed in a CSV or JSON output."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return RunConfig.from_flat(json.loads(text)["meta"]["config"])
    for line in text.splitlines():
        if line.startswith("# config: "):
            return RunConfig.from_flat(json.loads(line[len("# config: "):]))
    raise ConfigError("no config echo found")
