"""MSD time series with provenance, and their CSV/JSON serialization."""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from qbm.errors import InvariantError

CSV_COLUMNS = ("t", "msd", "route", "fallback")
# routes whose values are an asymptote and may legitimately dip below zero
SIGNED_ROUTES = ("low_t",)


@dataclass
class MsdSeries:
    """Time grid, MSD values and where they came from.

    ``params_echo`` maps every resolved input to a scalar or string;
    ``fallback_flags`` holds one provenance string per point ("" when the
    requested route was used as is).
    """

    times: np.ndarray
    values: np.ndarray
    route: str
    params_echo: dict = field(default_factory=dict)
    fallback_flags: list = None
    extra_columns: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.fallback_flags is None:
            self.fallback_flags = [""] * self.times.size
        self.fallback_flags = [str(f) for f in self.fallback_flags]
        self.extra_columns = {k: np.asarray(v, dtype=float) for k, v in self.extra_columns.items()}
        n = self.times.size
        if self.times.ndim != 1 or self.values.shape != (n,) or len(self.fallback_flags) != n:
            raise InvariantError("times, values and fallback_flags must have equal length")
        if any(col.shape != (n,) for col in self.extra_columns.values()):
            raise InvariantError("extra columns must match the time grid")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise InvariantError("times must be strictly ascending")
        if not np.all(np.isfinite(self.values)):
            raise InvariantError("MSD values must be finite")
        if self.route not in SIGNED_ROUTES and np.any(self.values < 0):
            raise InvariantError("MSD values must be >= 0")

    def __eq__(self, other):
        if not isinstance(other, MsdSeries):
            return NotImplemented
        return (
            self.route == other.route
            and self.params_echo == other.params_echo
            and self.fallback_flags == other.fallback_flags
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
            and self.extra_columns.keys() == other.extra_columns.keys()
            and all(np.array_equal(v, other.extra_columns[k]) for k, v in self.extra_columns.items())
        )


def format_float(x):
    """17 significant digits: enough for an exact binary64 round trip."""
    return "%.17g" % x


def _echo_value(v):
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def _parse_echo(text):
    """Header values come back as int, float or str, whichever parses first."""
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def to_csv(series: MsdSeries) -> str:
    lines = [f"# {key}={_echo_value(value)}" for key, value in series.params_echo.items()]
    extra = list(series.extra_columns)
    lines.append(",".join(CSV_COLUMNS + tuple(extra)))
    for i, (t, v, flag) in enumerate(zip(series.times, series.values, series.fallback_flags)):
        if "," in flag or "\n" in flag:
            raise InvariantError(f"fallback flag {flag!r} cannot be written to CSV")
        row = [format_float(t), format_float(v), series.route, flag]
        row += [format_float(series.extra_columns[k][i]) for k in extra]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> MsdSeries:
    echo = {}
    rows = []
    header = None
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            echo[key] = _parse_echo(value)
        elif header is None:
            header = line.split(",")
            if tuple(header[:4]) != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV columns {header!r}")
        else:
            rows.append(line.split(","))
    if header is None:
        raise ValueError("CSV has no column header")
    route = rows[0][2] if rows else str(echo.get("route", ""))
    extra = {name: [float(r[4 + j]) for r in rows] for j, name in enumerate(header[4:])}
    return MsdSeries(
        times=[float(r[0]) for r in rows],
        values=[float(r[1]) for r in rows],
        route=route,
        params_echo=echo,
        fallback_flags=[r[3] for r in rows],
        extra_columns=extra,
    )


def to_json(series: MsdSeries) -> str:
    points = []
    for i, (t, v, flag) in enumerate(zip(series.times, series.values, series.fallback_flags)):
        point = {"t": float(t), "msd": float(v), "fallback": flag}
        for k, col in series.extra_columns.items():
            point[k] = float(col[i])
        points.append(point)
    doc = {"params": series.params_echo, "route": series.route, "series": points}
    # json writes floats with repr, which round-trips exactly
    return json.dumps(doc, indent=1) + "\n"


def from_json(text: str) -> MsdSeries:
    doc = json.loads(text)
    points = doc["series"]
    extra_keys = [k for k in (points[0] if points else {}) if k not in ("t", "msd", "fallback")]
    return MsdSeries(
        times=[p["t"] for p in points],
        values=[p["msd"] for p in points],
        route=doc["route"],
        params_echo=doc["params"],
        fallback_flags=[p["fallback"] for p in points],
        extra_columns={k: [p[k] for p in points] for k in extra_keys},
    )


def write_series(series: MsdSeries, path, fmt=None):
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    text = to_json(series) if fmt == "json" else to_csv(series)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_series(path, fmt=None) -> MsdSeries:
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return from_json(text) if fmt == "json" else from_csv(text)


def time_grid(t_start, t_end, n_points, spacing="linear"):
    """Ascending time grid; log spacing requires ``t_start > 0``."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not (t_start >= 0 and t_end > t_start and math.isfinite(t_end)):
        raise ValueError(f"need 0 <= t_start < t_end, got [{t_start}, {t_end}]")
    if spacing == "linear":
        return np.linspace(t_start, t_end, n_points)
    if spacing == "log":
        if t_start <= 0:
            raise ValueError("log spacing needs t_start > 0")
        return np.geomspace(t_start, t_end, n_points)
    raise ValueError(f"unknown spacing {spacing!r}")
