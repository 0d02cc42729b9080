"""High- and low-temperature asymptotic MSD formulas for the Ohmic kernel.

The low-temperature formula is an asymptote in t, not a bound: it diverges
logarithmically at t -> 0 and is negative there. :func:`low_temperature_window`
gives the range of t where it is expected to track the exact result. That
window is this package's own construction, chosen so that the neglected
thermal and short-time corrections stay below about 2 %.
"""
import math
from dataclasses import dataclass

import numpy as np

from qbm.errors import DomainError
from qbm.model import ReducedParams
from qbm.specfun import euler_mascheroni

# t_lo = LOWT_T_LO_FACTOR / sqrt(gamma^2 + omega_c^2)
LOWT_T_LO_FACTOR = 6.0
# t_hi = LOWT_T_HI_FACTOR / (pi * omega_th)
LOWT_T_HI_FACTOR = 0.3


@dataclass(frozen=True)
class LimitDomain:
    regime: str
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if not self.t_lo < self.t_hi:
            raise DomainError(f"empty validity window [{self.t_lo}, {self.t_hi}]")

    def contains(self, t):
        return self.t_lo <= t <= self.t_hi


def msd_high_temperature(params: ReducedParams, t):
    """Classical (coth(x) ~ 1/x) MSD, linear at late times.

    Accepts scalar or array ``t``; exact zero at ``t = 0``.
    """
    if params.omega_th <= 0:
        raise DomainError("high-temperature limit needs omega_th > 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    g, wc = params.gamma, params.omega_c
    s = g * g + wc * wc
    damp = np.exp(-g * t)
    # -(g^2 - wc^2)(1 - cos e^{-gt}) written with expm1 so that MSD(0) == 0
    one_minus = -np.expm1(-g * t) + damp * (1.0 - np.cos(wc * t))
    braced = (
        g * t / s
        - (g * g - wc * wc) / (s * s) * one_minus
        - 2.0 * g * wc / (s * s) * np.sin(wc * t) * damp
    )
    out = 2.0 * params.hbar * params.omega_th / params.mass * braced
    return float(out) if out.ndim == 0 else out


def high_temperature_slope(params: ReducedParams):
    """Late-time slope 2 hbar omega_th gamma / (m (gamma^2 + omega_c^2))."""
    return 2.0 * params.hbar * params.omega_th * params.gamma / (params.mass * (params.gamma ** 2 + params.omega_c ** 2))


def low_temperature_window(params: ReducedParams) -> LimitDomain:
    t_lo = LOWT_T_LO_FACTOR / math.hypot(params.gamma, params.omega_c)
    t_hi = LOWT_T_HI_FACTOR / (math.pi * params.omega_th) if params.omega_th > 0 else math.inf
    if t_hi <= t_lo:
        # too warm for any window; keep a degenerate-but-valid interval
        t_hi = math.nextafter(t_lo, math.inf)
    return LimitDomain("low_t", t_lo, t_hi)


def _offset(g, wc, printed):
    # Constant left over from the harmonic numbers at argument -(g -+ i wc)/P
    # as P -> 0: H_{-x} = H_{x-1} + pi cot(pi x) contributes pi i sign(Im x),
    # which sums to 2 (wc/g) arctan(wc/g). ``printed`` keeps the cruder
    # pi wc / g, which is only its large-wc limit.
    if printed:
        return math.pi * wc / g
    return 2.0 * wc / g * math.atan(wc / g)


def msd_low_temperature(params: ReducedParams, t, printed=False):
    """Quantum (coth ~ 1) MSD, logarithmic at late times.

    Independent of omega_th; requires ``t > 0``. Use
    :func:`msd_low_temperature_flagged` to learn whether ``t`` lies in the
    validity window.

    Parameters
    ----------
    printed : bool
        Use the constant ``pi omega_c / gamma`` instead of the asymptotically
        exact ``2 (omega_c / gamma) arctan(omega_c / gamma)``. The two agree
        at omega_c = 0 and differ by a time-independent offset otherwise.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("low-temperature limit needs t > 0")
    g, wc = params.gamma, params.omega_c
    s = g * g + wc * wc
    braced = (
        2.0 * np.log(math.sqrt(s) * t)
        + 2.0 * euler_mascheroni()
        + _offset(g, wc, printed)
        - math.pi * np.exp(-g * t) * (wc / g * np.cos(wc * t) + np.sin(wc * t))
    )
    out = 2.0 * g * params.hbar / (math.pi * params.mass * s) * braced
    return float(out) if out.ndim == 0 else out


def msd_low_temperature_flagged(params: ReducedParams, t):
    """Return ``(value, valid)`` where ``valid`` is True inside the window."""
    window = low_temperature_window(params)
    return msd_low_temperature(params, t), window.contains(t)


def low_temperature_plateau(params: ReducedParams, t, printed=False):
    """Non-oscillating part of the low-temperature formula at time ``t``."""
    g, wc = params.gamma, params.omega_c
    s = g * g + wc * wc
    return 2.0 * g * params.hbar / (math.pi * params.mass * s) * (
        2.0 * math.log(math.sqrt(s) * t) + 2.0 * euler_mascheroni() + _offset(g, wc, printed)
    )
