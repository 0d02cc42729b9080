"""Monotonic versus damped-oscillatory classification of MSD curves.

The criterion is this package's own: a curve is oscillatory when it has at
least one local maximum standing out from the neighbouring local minima (or
the series endpoints) by more than ``prominence_rel`` times the total range
of the series. Endpoints are never counted as maxima.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from qbm.errors import InsufficientData, NonMonotoneFlip

MIN_SAMPLES = 16
DEFAULT_PROMINENCE = 1e-3


class Verdict(Enum):
    MONOTONIC = "Monotonic"
    DAMPED_OSCILLATORY = "DampedOscillatory"


@dataclass(frozen=True)
class RegimeClassification:
    verdict: Verdict
    n_local_maxima: int
    first_max_time: Optional[float] = None
    period_estimate: Optional[float] = None
    max_times: tuple = ()


def _turning_points(values):
    """Indices of interior local maxima and minima; plateaus count once."""
    d = np.sign(np.diff(values))
    # carry the last nonzero slope across flat stretches
    last = 0.0
    for i in range(d.size):
        if d[i] == 0:
            d[i] = last
        else:
            last = d[i]
    maxima = [i for i in range(1, d.size) if d[i - 1] > 0 and d[i] < 0]
    minima = [i for i in range(1, d.size) if d[i - 1] < 0 and d[i] > 0]
    return maxima, minima


def classify_values(times, values, prominence_rel=DEFAULT_PROMINENCE) -> RegimeClassification:
    """Classify a sampled curve given as plain arrays."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if times.size < MIN_SAMPLES:
        raise InsufficientData(f"need at least {MIN_SAMPLES} samples, got {times.size}")
    if not np.all(np.diff(times) > 0):
        raise ValueError("time grid must be strictly increasing")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")

    span = float(values.max() - values.min())
    maxima, minima = _turning_points(values)
    threshold = prominence_rel * span
    minima = np.asarray(minima, dtype=int)
    kept = []
    for i in maxima:
        left = minima[minima < i]
        right = minima[minima > i]
        base_left = values[left[-1]] if left.size else values[0]
        base_right = values[right[0]] if right.size else values[-1]
        if span > 0 and values[i] - max(base_left, base_right) > threshold:
            kept.append(i)

    if not kept:
        return RegimeClassification(Verdict.MONOTONIC, 0)
    max_times = tuple(float(times[i]) for i in kept)
    period = None
    if len(kept) >= 2:
        period = (max_times[-1] - max_times[0]) / (len(kept) - 1)
    return RegimeClassification(Verdict.DAMPED_OSCILLATORY, len(kept), max_times[0], period, max_times)


def classify_msd(series, prominence_rel=DEFAULT_PROMINENCE) -> RegimeClassification:
    """Classify an :class:`~qbm.series.MsdSeries` (anything with ``times`` and ``values``).

    Raises
    ------
    InsufficientData
        With fewer than 16 samples.
    """
    return classify_values(series.times, series.values, prominence_rel)


@dataclass(frozen=True)
class TransitionReport:
    omega_c: tuple
    classifications: tuple
    flip: Optional[float]


def scan_transition(params_base, route, omega_c_grid, t_window, samples, kernel=None, prominence_rel=DEFAULT_PROMINENCE,
                    mode=None):
    """Classify the MSD along an ascending omega_c grid.

    Raises
    ------
    NonMonotoneFlip
        If a Monotonic verdict follows an oscillatory one along the grid.
    """
    from qbm.routes import evaluate_series

    grid = [float(w) for w in omega_c_grid]
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ValueError("omega_c grid must be strictly ascending")
    t0, t1 = t_window
    times = np.linspace(t0, t1, samples)
    results = []
    for wc in grid:
        series = evaluate_series(params_base.replace(omega_c=wc), route, times, kernel=kernel, mode=mode)
        results.append(classify_msd(series, prominence_rel))

    flip = None
    for wc, res in zip(grid, results):
        oscillatory = res.verdict is Verdict.DAMPED_OSCILLATORY
        if flip is None and oscillatory:
            flip = wc
        elif flip is not None and not oscillatory:
            raise NonMonotoneFlip(f"classification returns to Monotonic at omega_c={wc!r} after flipping at {flip!r}")
    return TransitionReport(tuple(grid), tuple(results), flip)


def find_transition(params_base, route, omega_c_grid, t_window, samples, kernel=None, prominence_rel=DEFAULT_PROMINENCE,
                    mode=None):
    """Smallest grid omega_c classified DampedOscillatory, or ``None`` if none is.

    Every smaller grid value is guaranteed to classify as Monotonic.
    """
    return scan_transition(params_base, route, omega_c_grid, t_window, samples, kernel, prominence_rel, mode).flip
