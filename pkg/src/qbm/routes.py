"""Evaluate an MSD series on a time grid by any of the computation routes.

Routes: ``exact`` (closed form, Ohmic only), ``quadrature`` (any kernel and
temperature mode), ``high_t`` and ``low_t`` (asymptotic formulas, Ohmic
only) and ``simulate`` (classical ensemble, Ohmic high-temperature).
"""
import math
import os
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from qbm import limits
from qbm.closedform import msd_exact_ohmic_detailed
from qbm.errors import ConfigError
from qbm.model import Ohmic, ReducedParams
from qbm.quadrature import TemperatureMode, msd_quadrature
from qbm.series import MsdSeries

ROUTES = ("exact", "quadrature", "high_t", "low_t", "simulate")
# below this many points a process pool costs more than it saves
_PARALLEL_MIN_POINTS = 64


def worker_count():
    """Number of worker processes: CPU count, capped by ``QBM_THREADS``."""
    n = os.cpu_count() or 1
    cap = os.environ.get("QBM_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"QBM_THREADS must be a positive integer, got {cap!r}")
    return n


def _map(fn, items):
    workers = worker_count()
    if workers <= 1 or len(items) < _PARALLEL_MIN_POINTS:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _exact_point(params, settings, t):
    if t == 0:
        return 0.0, ""
    res = msd_exact_ohmic_detailed(params, t, settings)
    return res.msd, res.fallback


def _quadrature_point(params, kernel, mode, settings, t):
    return msd_quadrature(params, kernel, t, mode, settings), ""


def _require_ohmic(route, kernel):
    if not isinstance(kernel, Ohmic):
        raise ConfigError(f"route {route!r} supports only the Ohmic kernel; use route 'quadrature'")


def evaluate_series(params: ReducedParams, route, times, kernel=None, mode=None, settings=None, echo=None,
                    simulation=None, lowt_printed=False) -> MsdSeries:
    """Compute the MSD on ``times`` by ``route``.

    Parameters
    ----------
    kernel : KernelModel, optional
        Defaults to ``Ohmic(params.gamma)``.
    mode : TemperatureMode, optional
        Quadrature route only; defaults to full quantum.
    simulation : dict, optional
        ``n_particles``, ``seed`` and optionally ``dt`` for the simulate route.
    echo : dict, optional
        Extra header entries stored in ``params_echo``.
    lowt_printed : bool
        low_t route only; see :func:`qbm.limits.msd_low_temperature`.
    """
    if route not in ROUTES:
        raise ConfigError(f"unknown route {route!r}; choose from {', '.join(ROUTES)}")
    kernel = kernel or Ohmic(params.gamma)
    times = np.asarray(times, dtype=float)
    extra = {}
    if route == "exact":
        _require_ohmic(route, kernel)
        if params.omega_th <= 0:
            raise ConfigError("route 'exact' needs omega_th > 0")
        pairs = _map(partial(_exact_point, params, settings), list(times))
    elif route == "quadrature":
        mode = mode or TemperatureMode.FULL_QUANTUM
        if mode is TemperatureMode.HIGH_T and params.omega_th <= 0:
            raise ConfigError("high_t quadrature mode needs omega_th > 0")
        pairs = _map(partial(_quadrature_point, params, kernel, mode, settings), list(times))
    elif route == "high_t":
        _require_ohmic(route, kernel)
        if params.omega_th <= 0:
            raise ConfigError("route 'high_t' needs omega_th > 0")
        pairs = [(v, "") for v in np.atleast_1d(limits.msd_high_temperature(params, times))]
    elif route == "low_t":
        _require_ohmic(route, kernel)
        if np.any(times <= 0):
            raise ConfigError("route 'low_t' needs t > 0 (the formula diverges at t = 0)")
        window = limits.low_temperature_window(params)
        values = np.atleast_1d(limits.msd_low_temperature(params, times, printed=lowt_printed))
        pairs = [(v, "" if window.contains(t) else "outside_validity") for t, v in zip(times, values)]
    else:
        _require_ohmic(route, kernel)
        pairs, extra, times = _simulate(params, times, simulation or {})
    values = [p[0] for p in pairs]
    flags = [p[1] for p in pairs]
    return MsdSeries(times, values, route, dict(echo or {}), flags, extra)


def _simulate(params, times, options):
    from qbm.simulate import SimConfig, run_ensemble

    dt = options.get("dt") or 0.01 / max(params.gamma, params.omega_c)
    steps = np.rint(times / dt).astype(np.int64)
    if np.any(np.diff(steps) <= 0):
        raise ConfigError(f"time grid is finer than the simulation step dt={dt!r}")
    config = SimConfig(
        dt=dt,
        n_steps=max(1, int(steps[-1])),
        n_particles=int(options.get("n_particles", 10_000)),
        seed=int(options.get("seed", 0)),
        params=params,
        record_steps=tuple(int(k) for k in steps),
    )
    stats = run_ensemble(config)
    msd = stats.msd_mean
    se = stats.msd_stderr
    snapped = steps * dt
    flags = ["" if math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15) else "snapped_to_step" for a, b in zip(times, snapped)]
    return list(zip(msd, flags)), {"msd_stderr": se}, snapped
