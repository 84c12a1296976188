"""Run configuration, binary snapshots and diagnostics CSV."""
from __future__ import annotations

import csv
import logging
import math
import struct
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord, VirialConfig
from .evolution import EvolutionOptions
from .params import PhysParams
from .spectral import Grid, make_grid

__all__ = [
    "ConfigError",
    "ParseError",
    "ValidationError",
    "UnknownKey",
    "RunConfig",
    "CONFIG_KEYS",
    "load_config",
    "parse_config",
    "Snapshot",
    "write_snapshot",
    "read_snapshot",
    "DiagnosticsWriter",
    "format_float",
    "CSV_SCHEMA_VERSION",
]

log = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1
MAGIC = b"FNLS"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIdddd")


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, line: int, text: str):
        super().__init__(f"line {line}: cannot parse {text!r} (expected 'key = value')")
        self.line = line


class ValidationError(ConfigError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


class UnknownKey(ConfigError):
    def __init__(self, key: str):
        super().__init__(f"unknown key {key!r}")
        self.key = key


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key: (type, default, help)
CONFIG_KEYS: dict[str, tuple[type, object, str]] = {
    "N": (int, 2, "spatial dimension (1, 2 or 3)"),
    "s": (float, 0.75, "fractional order, 0 < s < 1"),
    "p": (float, 3.0, "nonlinearity power, p > 1"),
    "M": (int, 256, "grid points per dimension (power of two >= 16)"),
    "L": (float, 20.0, "half box length; the box is [-L, L)^N"),
    "gs_tol": (float, 1e-10, "ground-state tolerance, in (1e-12, 1e-4)"),
    "gs_max_iter": (int, 2000, "ground-state iteration cap"),
    "dt": (float, 1e-3, "time step"),
    "T": (float, 5.0, "final time"),
    "sample_every": (int, 10, "steps between diagnostics records"),
    "sponge": (_bool, False, "absorbing layer on the outer 20% of the box"),
    "sponge_strength": (float, 5.0, "absorption rate of the sponge"),
    "dealias": (_bool, False, "apply a 2/3-rule filter after each nonlinear substep"),
    "virial_R": (float, math.nan, "virial radius R (default L/3)"),
    "m_nodes": (int, 200, "quadrature nodes for the m-integral"),
    "rate_every": (int, 10, "records between virial rate-identity evaluations"),
    "init_family": (str, "ground_state_multiple", "initial data: gaussian | ground_state_multiple"),
    "multiple": (float, 0.5, "c in u0 = c Q"),
    "amplitude": (float, 1.0, "Gaussian amplitude"),
    "width": (float, 1.0, "Gaussian width w in exp(-|x|^2/w^2)"),
    "chirp": (float, 0.0, "Gaussian chirp b in exp(i b |x|^2)"),
    "out_dir": (str, "out", "output directory (overridden by --out)"),
    "snapshot_every": (int, 0, "steps between snapshots, a multiple of sample_every (0: final only)"),
}

FAMILIES = ("gaussian", "ground_state_multiple")


@dataclass(frozen=True)
class RunConfig:
    N: int = 2
    s: float = 0.75
    p: float = 3.0
    M: int = 256
    L: float = 20.0
    gs_tol: float = 1e-10
    gs_max_iter: int = 2000
    dt: float = 1e-3
    T: float = 5.0
    sample_every: int = 10
    sponge: bool = False
    sponge_strength: float = 5.0
    dealias: bool = False
    virial_R: float = math.nan
    m_nodes: int = 200
    rate_every: int = 10
    init_family: str = "ground_state_multiple"
    multiple: float = 0.5
    amplitude: float = 1.0
    width: float = 1.0
    chirp: float = 0.0
    out_dir: str = "out"
    snapshot_every: int = 0

    def __post_init__(self):
        _validate(self)

    @property
    def params(self) -> PhysParams:
        return PhysParams(self.N, self.s, self.p)

    def grid(self) -> Grid:
        return make_grid(self.N, self.M, self.L)

    @property
    def options(self) -> EvolutionOptions:
        return EvolutionOptions(sponge=self.sponge, sponge_strength=self.sponge_strength, dealias=self.dealias)

    @property
    def virial(self) -> VirialConfig:
        R = self.L / 3.0 if math.isnan(self.virial_R) else self.virial_R
        return VirialConfig(R, self.m_nodes)


def _validate(c: RunConfig) -> None:
    def need(ok: bool, key: str, reason: str):
        if not ok:
            raise ValidationError(key, reason)

    need(c.N in (1, 2, 3), "N", "must be 1, 2 or 3")
    need(0 < c.s < 1, "s", "must lie in (0, 1)")
    need(c.p > 1, "p", "must exceed 1")
    need(c.M >= 16 and c.M & (c.M - 1) == 0, "M", "must be a power of two >= 16")
    need(c.L > 0, "L", "must be positive")
    need(1e-12 < c.gs_tol < 1e-4, "gs_tol", "must lie in (1e-12, 1e-4)")
    need(c.gs_max_iter >= 1, "gs_max_iter", "must be >= 1")
    need(c.dt > 0, "dt", "must be positive")
    need(c.T >= 0, "T", "must be nonnegative")
    need(c.sample_every >= 1, "sample_every", "must be >= 1")
    need(c.sponge_strength >= 0, "sponge_strength", "must be nonnegative")
    need(math.isnan(c.virial_R) or c.virial_R > 0, "virial_R", "must be positive")
    need(c.m_nodes >= 2, "m_nodes", "must be >= 2")
    need(c.rate_every >= 1, "rate_every", "must be >= 1")
    need(c.init_family in FAMILIES, "init_family", f"must be one of {', '.join(FAMILIES)}")
    need(c.multiple >= 0, "multiple", "must be nonnegative")
    need(c.width > 0, "width", "must be positive")
    need(c.snapshot_every >= 0, "snapshot_every", "must be nonnegative")
    need(c.snapshot_every % c.sample_every == 0, "snapshot_every", "must be a multiple of sample_every")


def parse_config(text: str) -> RunConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, raw)
        key, _, val = (part.strip() for part in line.partition("="))
        if not key or not val:
            raise ParseError(lineno, raw)
        if key not in CONFIG_KEYS:
            raise UnknownKey(key)
        conv = CONFIG_KEYS[key][0]
        try:
            if conv is int:
                f = float(val)
                if f != int(f):
                    raise ValueError("not an integer")
                values[key] = int(f)
            else:
                values[key] = conv(val)
        except ValueError as exc:
            raise ValidationError(key, str(exc)) from None
    cfg = RunConfig(**values)
    pp = cfg.params
    if pp.power <= pp.lower_power:
        log.warning("subcritical: below 1+4s/N = %g (p = %g); classify refuses, evolve allowed", pp.lower_power, pp.power)
    elif pp.power >= pp.upper_power:
        log.warning("p = %g is not below the energy-critical power %g", pp.power, pp.upper_power)
    return cfg


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def config_help() -> str:
    lines = ["configuration keys (flat 'key = value' lines, '#' starts a comment):"]
    for key, (_, default, doc) in CONFIG_KEYS.items():
        lines.append(f"  {key:<16} {doc} [default: {default}]")
    return "\n".join(lines)


@dataclass(frozen=True)
class Snapshot:
    dim: int
    points_per_dim: int
    half_length: float
    time: float
    s: float
    p: float
    field: np.ndarray


def write_snapshot(path, field: np.ndarray, grid: Grid, time: float, params: PhysParams) -> None:
    """Little-endian header followed by interleaved (re, im) float64, row-major."""
    data = np.ascontiguousarray(field, dtype="<c16")
    if data.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    header = _HEADER.pack(
        MAGIC, SNAPSHOT_VERSION, grid.dim, grid.points_per_dim,
        grid.half_length, float(time), float(params.order), float(params.power),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes(order="C"))


def read_snapshot(path) -> Snapshot:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("snapshot truncated")
    magic, version, dim, M, L, t, s, p = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    payload = raw[_HEADER.size:]
    if len(payload) != 16 * M**dim:
        raise ValueError(f"payload length {len(payload)} != {16 * M**dim}")
    field = np.frombuffer(payload, dtype="<c16").reshape((M,) * dim).astype(complex)
    return Snapshot(dim, M, L, t, s, p, field)


def format_float(x: float) -> str:
    return "%.17g" % x


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


class DiagnosticsWriter:
    """Streams :class:`DiagnosticsRecord` rows; the header is the field names in order."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(DiagnosticsRecord.field_names())

    def __call__(self, rec: DiagnosticsRecord) -> None:
        self._w.writerow([_cell(getattr(rec, f.name)) for f in fields(rec)])

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_row_csv(path, header, row) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerow([_cell(v) for v in row])
