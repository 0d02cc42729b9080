"""Direct quadrature of the fluctuation-dissipation MSD integral.

The MSD for a kernel K(omega) = K' + i K'' reads

    <dr^2>(t) = (2 hbar / (pi m)) * PV int_{-inf}^{inf} dw  w(w) K' N / (w D) (1 - exp(-i w t))

with ``N = A^2 + omega_c^2 + K'^2``, ``D = N^2 - 4 omega_c^2 A^2`` and
``A = w - K''(w)``, ``w(w)`` the thermal weight coth(w / omega_th). The
integrand without the exponential is odd in ``w`` and the ``sin`` part of the
exponential is odd as well, so only ``1 - cos(w t)`` survives; everything is
folded onto ``(0, inf)``.

Sign of ``K''``: :func:`qbm.model.kernel_fourier` transforms with
``exp(+i w t)``, under which the retarded response of a charge is
``1 / (w (w + i K)^2 - w omega_c^2)``; its modulus involves ``w - K''``. For
the Ohmic kernel ``K'' = 0`` and the distinction disappears.
"""
import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from qbm.errors import ConvergenceError, DenominatorZero, DomainError, InvariantError
from qbm.model import KernelModel, Ohmic, ReducedParams, kernel_fourier


class TemperatureMode(Enum):
    FULL_QUANTUM = "full_quantum"
    HIGH_T = "high_t"
    LOW_T = "low_t"


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 5000

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-3):
            raise InvariantError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise InvariantError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_subdivisions < 100:
            raise InvariantError(f"max_subdivisions must be >= 100, got {self.max_subdivisions}")


DEFAULT_SETTINGS = QuadratureSettings()

# oscillation periods integrated in the plain adaptive head before splitting
# off the cosine part
_HEAD_PERIODS = 8
# beyond this multiple of the largest physical scale the integrand is a pure
# power-law tail
_TAIL_FACTOR = 50.0


def _check_mode(params, mode):
    if mode is TemperatureMode.HIGH_T and params.omega_th <= 0:
        raise InvariantError("HighT mode requires omega_th > 0")


def _omega_times_weight(omega, params, mode):
    """omega * thermal weight, finite as omega -> 0 (tends to omega_th)."""
    if mode is TemperatureMode.LOW_T or params.omega_th == 0.0:
        return omega
    if mode is TemperatureMode.HIGH_T:
        return params.omega_th
    x = omega / params.omega_th
    if x < 1e-4:
        # x coth x = 1 + x^2/3 + O(x^4)
        return params.omega_th * (1.0 + x * x / 3.0)
    return omega / math.tanh(x)


def _weight_over_omega(omega, params, mode):
    """Thermal weight divided by omega, for omega > 0."""
    return _omega_times_weight(omega, params, mode) / (omega * omega)


def _response_factor(omega, params, kernel):
    """Re K * N / D, the frequency-dependent part of the integrand."""
    k = kernel_fourier(kernel, omega)
    b = k.real
    a = omega - k.imag
    wc = params.omega_c
    n = a * a + wc * wc + b * b
    # D = N^2 - 4 wc^2 A^2 factored into two sums of squares
    d = ((a - wc) ** 2 + b * b) * ((a + wc) ** 2 + b * b)
    if not d > 1e-300:
        raise DenominatorZero(f"response denominator vanished at omega={omega!r}")
    return b * n / d


def _prefactor(params):
    return 4.0 * params.hbar / (math.pi * params.mass)


def msd_integrand(params: ReducedParams, kernel: KernelModel, omega, t, mode=TemperatureMode.FULL_QUANTUM):
    """Folded MSD integrand; ``msd(t) = int_0^inf msd_integrand(..., w, t, ...) dw``.

    Includes the prefactor ``2 hbar / (pi m)`` and the factor 2 from folding.
    At ``omega = 0`` the finite analytic limit is returned.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    _check_mode(params, mode)
    omega = abs(float(omega))
    if t == 0:
        return 0.0
    # written as [w * weight] * (1 - cos wt) / w^2 so that tiny omega neither
    # underflows nor overflows; at omega = 0, (1 - cos wt) / w^2 -> t^2 / 2
    if omega == 0.0:
        sinc_sq = 0.5 * t * t
    else:
        r = math.sin(0.5 * omega * t) / omega
        sinc_sq = 2.0 * r * r
    return _prefactor(params) * _omega_times_weight(omega, params, mode) * _response_factor(omega, params, kernel) * sinc_sq


def _envelope(params, kernel, mode):
    pref = _prefactor(params)

    def g(omega):
        return pref * _weight_over_omega(omega, params, mode) * _response_factor(omega, params, kernel)

    return g


def natural_scales(params, kernel, mode):
    scales = [params.gamma]
    if params.omega_c > 0:
        scales.append(params.omega_c)
    if mode is not TemperatureMode.LOW_T and params.omega_th > 0:
        scales.append(max(params.omega_th, params.gamma))
    scales.extend(kernel.scales())
    return sorted(scales)


class _Accumulator:
    def __init__(self, settings):
        self.settings = settings
        self.value = 0.0
        self.error = 0.0
        self.flagged = []

    def add(self, sign, *args, **kwargs):
        kwargs.setdefault("limit", self.settings.max_subdivisions)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            value, err = integrate.quad(*args, **kwargs)[:2]
        if caught:
            self.flagged.append(str(caught[-1].message).splitlines()[0])
        self.value += sign * value
        self.error += err
        return value


def _split_points(lo, hi, scales):
    pts = {lo, hi}
    for s in scales:
        for f in (0.3, 1.0, 3.0):
            x = s * f
            if lo < x < hi:
                pts.add(x)
    x = lo * 10.0
    while 0.0 < x < hi:
        pts.add(x)
        x *= 10.0
    return sorted(pts)


def msd_quadrature(params: ReducedParams, kernel: KernelModel, t, mode=TemperatureMode.FULL_QUANTUM, settings=None):
    """MSD by adaptive quadrature of the folded integral.

    The half line is cut into a head ``[0, w1]`` holding at most a few
    oscillation periods (plain adaptive quadrature with breakpoints at the
    zeros of ``1 - cos(wt)`` and at the physical scales), a middle section up
    to ``50 * max(scale)`` and a power-law tail. Beyond the head the
    non-oscillatory and the ``cos(wt)`` parts are integrated separately,
    the latter with QUADPACK's Fourier-weight routines (modified Chebyshev
    moments on finite panels; cycle-by-cycle summation with epsilon
    extrapolation on the infinite tail).

    Raises
    ------
    ConvergenceError
        If the accumulated error estimate exceeds the requested tolerance.
    """
    settings = settings or DEFAULT_SETTINGS
    if t < 0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    _check_mode(params, mode)
    if t == 0:
        return 0.0
    scales = natural_scales(params, kernel, mode)
    w_tail = _TAIL_FACTOR * scales[-1]
    half_period = math.pi / t
    w_head = min(w_tail, 2 * _HEAD_PERIODS * half_period)
    rel, atol = settings.rel_tol, settings.abs_tol

    def full(omega):
        return msd_integrand(params, kernel, omega, t, mode)

    g = _envelope(params, kernel, mode)
    acc = _Accumulator(settings)

    head_pts = [k * half_period for k in range(1, 2 * _HEAD_PERIODS) if k * half_period < w_head]
    head_pts += [p for p in _split_points(0.0, w_head, scales) if 0.0 < p < w_head]
    head_pts = sorted(set(head_pts))
    acc.add(1.0, full, 0.0, w_head, points=head_pts or None, epsrel=rel * 0.1, epsabs=atol)

    if w_head < w_tail:
        pts = _split_points(w_head, w_tail, scales)
        for lo, hi in zip(pts[:-1], pts[1:]):
            acc.add(1.0, g, lo, hi, epsrel=rel * 0.1, epsabs=atol)
            acc.add(-1.0, g, lo, hi, weight="cos", wvar=t, epsrel=rel * 0.1, epsabs=atol)

    tail_plain = acc.add(1.0, g, w_tail, np.inf, epsrel=rel * 0.1, epsabs=atol)
    # the Fourier routine honours only an absolute tolerance
    acc.add(-1.0, g, w_tail, np.inf, weight="cos", wvar=t, epsabs=max(atol, 0.01 * rel * abs(tail_plain)))

    value = acc.value
    budget = max(rel * abs(value), atol)
    if acc.error > 10.0 * budget:
        raise ConvergenceError(
            f"quadrature at t={t!r} reached error {acc.error:.3e} > budget {budget:.3e}"
            + (f" ({acc.flagged[0]})" if acc.flagged else ""),
            achieved=acc.error / abs(value) if value else acc.error,
        )
    return max(value, 0.0)


def msd_quadrature_reference(params: ReducedParams, kernel: KernelModel, t, mode=TemperatureMode.FULL_QUANTUM, cutoff=None):
    """Unfolded two-sided integration of the complex integrand (slow, tests only).

    Integrates real and imaginary parts of ``w(w) K' N / (w D) (1 - e^{-iwt})``
    over ``[-cutoff, cutoff]`` with the pole at ``w = 0`` taken as a Cauchy
    principal value, plus the two semi-infinite tails. Returns a complex
    number whose imaginary part should vanish.
    """
    _check_mode(params, mode)
    if t <= 0:
        raise DomainError("reference path needs t > 0")
    pref = 0.5 * _prefactor(params)
    cutoff = cutoff or _TAIL_FACTOR * natural_scales(params, kernel, mode)[-1]

    def weight(omega):
        if mode is TemperatureMode.LOW_T:
            return math.copysign(1.0, omega)
        if mode is TemperatureMode.HIGH_T:
            return params.omega_th / omega
        if params.omega_th == 0.0:
            return math.copysign(1.0, omega)
        return 1.0 / math.tanh(omega / params.omega_th)

    def numerator(omega):
        # omega * integrand, regular at omega = 0 except for the thermal weight
        k = kernel_fourier(kernel, omega)
        b, a, wc = k.real, omega - k.imag, params.omega_c
        n = a * a + wc * wc + b * b
        d = ((a - wc) ** 2 + b * b) * ((a + wc) ** 2 + b * b)
        return pref * b * n / d * (1.0 - cmath.exp(-1j * omega * t))

    def times_weight(omega):
        # omega times the full integrand
        if omega == 0.0:
            if mode is TemperatureMode.LOW_T or params.omega_th == 0.0:
                return 0j
            om = 1e-12
            return numerator(om) * weight(om)
        return numerator(omega) * weight(omega)

    def part(fn, lo, hi, **kw):
        with warnings.catch_warnings():
            # the imaginary part is odd and integrates to ~0, which QUADPACK
            # tends to report as slow convergence
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re = integrate.quad(lambda w: fn(w).real, lo, hi, limit=5000, **kw)[0]
            im = integrate.quad(lambda w: fn(w).imag, lo, hi, limit=5000, **kw)[0]
        return complex(re, im)

    # weight(w) * numerator(w) is regular at 0 (FullQuantum/HighT) or has a
    # jump (LowT); the remaining 1/w is the Cauchy principal value.
    inner = part(times_weight, -cutoff, cutoff, weight="cauchy", wvar=0.0)

    def over_omega(w):
        return times_weight(w) / w

    outer = part(over_omega, cutoff, np.inf) + part(over_omega, -np.inf, -cutoff)
    return inner + outer
