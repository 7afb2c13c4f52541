"""Parameter sweeps and result files.

Each sweep point evaluates the closed-form MSE and rate and, unless disabled,
their Monte Carlo counterparts. Point ``k`` uses random streams keyed by
``(seed, k)``, so a rerun with the same configuration reproduces every number.
A point that raises is recorded as NaN with its error message; the sweep goes on.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import SystemConfig
from .energy_rate import analytic_rate, monte_carlo_rate
from .sensing import analytic_mse, monte_carlo_mse

log = logging.getLogger(__name__)

CSV_COLUMNS = ("sweep_value", "analytic_mse", "mc_mse", "mc_mse_stderr",
               "analytic_rate", "mc_rate", "mc_rate_stderr", "failure_rate")
_VALUE_COLUMNS = CSV_COLUMNS[1:]

DEFAULT_POWER_GRID = tuple(float(x) for x in np.logspace(-1, 3, 10))
DEFAULT_SPACING_GRID = tuple(round(0.2 * k, 10) for k in range(1, 26))
DEFAULT_ALPHA_GRID = tuple(round(0.05 * k, 10) for k in range(1, 20))


def _version() -> str:
    from . import __version__
    return __version__


@dataclass(frozen=True)
class SweepResult:
    """Per-point analytic and Monte Carlo results of a one-parameter sweep."""

    sweep_variable: str
    grid: tuple
    analytic_mse: tuple
    mc_mse: tuple
    mc_mse_stderr: tuple
    analytic_rate: tuple
    mc_rate: tuple
    mc_rate_stderr: tuple
    failure_rate: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.grid)
        for name in _VALUE_COLUMNS:
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries, grid has {n}")
        g = np.asarray(self.grid, dtype=float)
        if n > 1 and not (np.all(np.diff(g) > 0) or np.all(np.diff(g) < 0)):
            raise ValueError("grid must be strictly monotone")
        for name in ("mc_mse_stderr", "mc_rate_stderr"):
            if np.any(np.asarray(getattr(self, name), dtype=float) < 0):
                raise ValueError(f"{name} must be >= 0")

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.grid if name == "sweep_value" else getattr(self, name), dtype=float)

    def rows(self):
        for i in range(len(self.grid)):
            yield tuple(self.column(c)[i] for c in CSV_COLUMNS)


def _check_grid(grid, lo=0.0, hi=math.inf, name="grid"):
    g = [float(x) for x in grid]
    if not g:
        raise ValueError(f"{name} must be nonempty")
    if any(not (lo < x < hi) for x in g):
        raise ValueError(f"{name} values must lie in ({lo}, {hi})")
    return tuple(g)


def _evaluate_point(cfg: SystemConfig, k: int, montecarlo: bool, rates: bool, mse_method: str):
    nan = math.nan
    out = dict.fromkeys(_VALUE_COLUMNS, nan)
    errors = []

    def attempt(label, fn):
        try:
            return fn()
        except Exception as exc:  # a bad point must not sink the sweep
            errors.append(f"{label}: {type(exc).__name__}: {exc}")
            log.warning("point %d %s failed: %s", k, label, exc)
            return None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = attempt("analytic_mse", lambda: analytic_mse(cfg, method=mse_method))
    if a is not None:
        out["analytic_mse"] = a
    if montecarlo:
        est = attempt("mc_mse", lambda: monte_carlo_mse(cfg, point=k))
        if est is not None:
            out["mc_mse"], out["mc_mse_stderr"], out["failure_rate"] = (
                est.mean, est.stderr, est.failure_rate)
    if rates:
        r = attempt("analytic_rate", lambda: analytic_rate(cfg))
        if r is not None:
            out["analytic_rate"] = r
        if montecarlo:
            est = attempt("mc_rate", lambda: monte_carlo_rate(cfg, point=k))
            if est is not None:
                out["mc_rate"], out["mc_rate_stderr"] = est.mean, est.stderr
    return out, errors


def run_sweep(cfg: SystemConfig, variable: str, grid, configure, *, montecarlo=True,
              rates=True, mse_method="linearized") -> SweepResult:
    """Evaluate ``configure(cfg, value)`` at every grid value."""
    cols = {c: [] for c in _VALUE_COLUMNS}
    errors = {}
    for k, value in enumerate(grid):
        point_cfg = configure(cfg, value)
        out, errs = _evaluate_point(point_cfg, k, montecarlo, rates, mse_method)
        for c in _VALUE_COLUMNS:
            cols[c].append(float(out[c]))
        if errs:
            errors[str(k)] = errs
        log.info("%s=%g analytic_mse=%.4g mc_mse=%.4g", variable, value,
                 out["analytic_mse"], out["mc_mse"])
    meta = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": _version(),
        "montecarlo": bool(montecarlo),
        "mse_method": mse_method,
        "config": cfg.to_dict(),
        "errors": errors,
    }
    return SweepResult(variable, tuple(grid), *(tuple(cols[c]) for c in _VALUE_COLUMNS),
                       metadata=meta)


def sweep_power(cfg: SystemConfig, p_dl_grid=DEFAULT_POWER_GRID, **kw) -> SweepResult:
    """MSE and rate versus downlink transmit power (watts)."""
    grid = _check_grid(p_dl_grid, name="p_dl_grid")
    return run_sweep(cfg, "p_dl", grid, lambda c, v: c.replace(eh__p_dl=v), **kw)


def sweep_spacing(cfg: SystemConfig, rho_grid=DEFAULT_SPACING_GRID, **kw) -> SweepResult:
    """MSE and rate versus camera grid spacing, equal in x and y (metres)."""
    grid = _check_grid(rho_grid, name="rho_grid")
    return run_sweep(cfg, "spacing", grid,
                     lambda c, v: c.replace(camera__spacing_x=v, camera__spacing_y=v), **kw)


def sweep_alpha(cfg: SystemConfig, alpha_grid=DEFAULT_ALPHA_GRID, **kw) -> SweepResult:
    """MSE and rate versus the harvest fraction of each frame."""
    grid = _check_grid(alpha_grid, 0.0, 1.0, name="alpha_grid")
    return run_sweep(cfg, "alpha", grid, lambda c, v: c.replace(eh__alpha=v), **kw)


def simulate(cfg: SystemConfig, **kw) -> SweepResult:
    """A single point at the configured downlink power."""
    return run_sweep(cfg, "p_dl", (cfg.eh.p_dl,), lambda c, v: c, **kw)


# -- persistence -----------------------------------------------------------

def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def to_csv(r: SweepResult) -> str:
    """CSV text: one ``#`` provenance line, the header, one row per point.

    The provenance line carries the config hash and seed but no timestamp, so
    identical runs give identical bytes.
    """
    buf = io.StringIO()
    buf.write(f"# sweep={r.sweep_variable} config_hash={r.metadata.get('config_hash', '')} "
              f"seed={r.metadata.get('seed', '')} version={r.metadata.get('version', '')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in r.rows():
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def to_json(r: SweepResult) -> str:
    return json.dumps(asdict(r), indent=2, sort_keys=True)


def emit_results(r: SweepResult, path, fmt: str = "csv") -> Path:
    """Write ``r`` to ``path`` as CSV or JSON; I/O errors name the path."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r} (csv or json)")
    path = Path(path)
    text = to_csv(r) if fmt == "csv" else to_json(r)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def from_json(text: str) -> SweepResult:
    d = json.loads(text)
    meta = d.pop("metadata", {})
    return SweepResult(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()},
                       metadata=meta)


def load_results(path) -> SweepResult:
    """Read a JSON result file written by :func:`emit_results`."""
    path = Path(path)
    try:
        return from_json(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
