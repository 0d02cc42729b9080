"""Exact Ohmic MSD as a sum of contour-integral residues.

With p = gamma + i omega_c, q = gamma - i omega_c, P = pi * omega_th and
x = exp(-P t), the MSD is ``(i hbar / (pi m)) (I1 - I2 + I3 - I4)`` where

    I_k = PV int dw coth(w / omega_th) (1 - e^{-iwt}) / (2 w (w + a_k)),
    a_1 = omega_c + i gamma, a_2 = omega_c - i gamma, a_3 = -a_2, a_4 = -a_1.

Closing each contour in the lower half plane picks up the Matsubara poles
``w = -i n P`` (harmonic numbers and Lerch transcendents in x), the cyclotron
pole ``w = -a_k`` for I1 and I3, and the pole at the origin. The origin's
contribution, linear in t, is carried entirely by I1 and I3 as
``pi t omega_th / a_k``; only the combination I1 - I2 + I3 - I4 is
unambiguous.
"""
import cmath
import math
from dataclasses import dataclass

from qbm.errors import DomainError, PoleCoincidenceError, PoleError
from qbm.model import Ohmic, ReducedParams
from qbm.specfun import coth_c, harmonic_number, lerch_phi

IMAG_TOL = 1e-9
COINCIDENCE_TOL = 1e-6
T_MIN_FACTOR = 1e-3


@dataclass(frozen=True)
class ResidueBreakdown:
    i1: complex
    i2: complex
    i3: complex
    i4: complex
    assembled: complex
    msd: float


@dataclass(frozen=True)
class ExactResult:
    """MSD value with provenance; ``fallback`` names the route actually used."""

    msd: float
    fallback: str = ""


def t_min(params: ReducedParams) -> float:
    """Below this time the closed form loses accuracy to cancellation."""
    return T_MIN_FACTOR / max(params.gamma, params.omega_c, math.pi * params.omega_th)


def _require_positive(params, t):
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"closed form needs finite t > 0, got {t}")
    if not params.omega_th > 0:
        raise DomainError("closed form needs omega_th > 0; use the low-temperature limit or LowT quadrature")


def check_coincidence(params: ReducedParams):
    """Raise if (gamma -+ i omega_c) / (pi omega_th) is close to a positive integer."""
    big_p = math.pi * params.omega_th
    for c in (complex(params.gamma, params.omega_c) / big_p, complex(params.gamma, -params.omega_c) / big_p):
        n = round(c.real)
        if n >= 1 and abs(c - n) <= COINCIDENCE_TOL * n:
            raise PoleCoincidenceError(
                f"(gamma +- i omega_c)/(pi omega_th) = {c:.12g} coincides with Matsubara index {n}"
            )


class _Pieces:
    """Shared ingredients of the four residue integrals."""

    def __init__(self, params, t):
        _require_positive(params, t)
        check_coincidence(params)
        g, wc, wth = params.gamma, params.omega_c, params.omega_th
        self.p = complex(g, wc)
        self.q = complex(g, -wc)
        big_p = math.pi * wth
        self.big_p = big_p
        self.x = math.exp(-big_p * t)
        self.log1mx = math.log1p(-self.x)
        self.lin = big_p * t
        self.t = t
        self.wth = wth
        try:
            self.coth_plus = coth_c(complex(wc, g) / wth)  # coth((wc + i g)/W)
            self.coth_minus = coth_c(complex(wc, -g) / wth)  # coth((wc - i g)/W)
        except PoleError as exc:
            raise PoleCoincidenceError(str(exc)) from exc

    def matsubara(self, c):
        """H_c + x Phi(x, 1, 1 + c) + ln(1 - x)."""
        try:
            return harmonic_number(c) + self.x * lerch_phi(self.x, 1.0 + c) + self.log1mx
        except PoleError as exc:
            raise PoleCoincidenceError(str(exc)) from exc


def _residues(params, t):
    s = _Pieces(params, t)
    p, q, big_p = s.p, s.q, s.big_p
    m2pi = -2j * math.pi
    wc, g = params.omega_c, params.gamma
    e_plus = cmath.exp(complex(-g * t, wc * t))  # e^{-gamma t + i omega_c t}
    e_minus = cmath.exp(complex(-g * t, -wc * t))  # e^{-t (gamma + i omega_c)}
    i1 = m2pi * (
        (s.matsubara(-q / big_p) + s.lin) / (2 * math.pi * q)
        + (1.0 - e_plus) * s.coth_plus / (2 * complex(wc, g))
    )
    i2 = m2pi * (-s.matsubara(p / big_p) / (2 * math.pi * p))
    i3 = m2pi * (
        (s.matsubara(-p / big_p) + s.lin) / (2 * math.pi * p)
        + (1.0 - e_minus) * s.coth_minus / (2 * complex(wc, -g))
    )
    i4 = m2pi * (-s.matsubara(q / big_p) / (2 * math.pi * q))
    return i1, i2, i3, i4


def residue_i1(params: ReducedParams, t) -> complex:
    """I1: Matsubara poles, cyclotron pole at -(omega_c + i gamma), origin term."""
    return _residues(params, t)[0]


def residue_i2(params: ReducedParams, t) -> complex:
    """I2: Matsubara poles only."""
    return _residues(params, t)[1]


def residue_i3(params: ReducedParams, t) -> complex:
    """I3: Matsubara poles, cyclotron pole at omega_c - i gamma, origin term."""
    return _residues(params, t)[2]


def residue_i4(params: ReducedParams, t) -> complex:
    """I4: Matsubara poles only."""
    return _residues(params, t)[3]


def residue_breakdown(params: ReducedParams, t) -> ResidueBreakdown:
    i1, i2, i3, i4 = _residues(params, t)
    assembled = i1 - i2 + i3 - i4
    value = 1j * params.hbar / (math.pi * params.mass) * assembled
    return ResidueBreakdown(i1, i2, i3, i4, assembled, value.real)


def _braced_sum(params, t):
    """The curly-bracket sum of the final formula (complex; real in exact arithmetic)."""
    s = _Pieces(params, t)
    p, q, big_p, x = s.p, s.q, s.big_p, s.x
    wc, g = params.omega_c, params.gamma
    h = harmonic_number
    total = p * (h(q / big_p) + h(-q / big_p)) + q * (h(-p / big_p) + h(p / big_p))
    if x > 0.0:
        phi = lerch_phi
        total += x * p * (phi(x, 1.0 + q / big_p) + phi(x, 1.0 - q / big_p))
        total += x * q * (phi(x, 1.0 + p / big_p) + phi(x, 1.0 - p / big_p))
    total += 2.0 * g * (s.lin + 2.0 * s.log1mx)
    total += math.pi * complex(wc, g) * (1.0 - cmath.exp(-t * p)) * s.coth_minus
    total += math.pi * complex(wc, -g) * (1.0 - cmath.exp(complex(-g * t, wc * t))) * s.coth_plus
    return total


def msd_closed_form(params: ReducedParams, t) -> complex:
    """Complex value of the assembled closed form (no fallback, no reality check)."""
    try:
        braced = _braced_sum(params, t)
    except PoleError as exc:
        raise PoleCoincidenceError(str(exc)) from exc
    return params.hbar / (math.pi * params.mass * (params.gamma ** 2 + params.omega_c ** 2)) * braced


def msd_exact_ohmic_detailed(params: ReducedParams, t, settings=None) -> ExactResult:
    """Closed-form Ohmic MSD with the small-t and pole-coincidence fallbacks.

    For ``t < t_min`` or when a Matsubara pole meets a cyclotron pole the value
    is computed by quadrature instead and ``fallback`` says why.
    """
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"exact MSD needs finite t > 0, got {t}")
    if not params.omega_th > 0:
        raise DomainError("exact MSD needs omega_th > 0")
    from qbm.quadrature import TemperatureMode, msd_quadrature

    def by_quadrature(reason):
        value = msd_quadrature(params, Ohmic(params.gamma), t, TemperatureMode.FULL_QUANTUM, settings)
        return ExactResult(value, reason)

    if t < t_min(params):
        return by_quadrature("quadrature:t<t_min")
    try:
        value = msd_closed_form(params, t)
    except PoleCoincidenceError:
        return by_quadrature("quadrature:pole_coincidence")
    re = value.real
    if abs(value.imag) > IMAG_TOL * max(abs(re), 1e-300):
        raise ArithmeticError(f"closed form has imaginary residue {value.imag:.3e} at t={t!r} (real part {re:.3e})")
    return ExactResult(max(re, 0.0))


def msd_exact_ohmic(params: ReducedParams, t, settings=None) -> float:
    """Exact Ohmic-kernel MSD at time ``t`` from the residue-sum closed form."""
    return msd_exact_ohmic_detailed(params, t, settings).msd


def four_pole_sum(params: ReducedParams, omega) -> complex:
    """(i/2) [1/(w+wc+ig) - 1/(w+wc-ig) + 1/(w-wc+ig) - 1/(w-wc-ig)].

    Equals 2 gamma N / D of the Ohmic integrand (a real number) when the
    partial-fraction decomposition behind the residue sum is right.
    """
    g, wc = params.gamma, params.omega_c
    w = float(omega)
    braces = (
        1.0 / complex(w + wc, g)
        - 1.0 / complex(w + wc, -g)
        + 1.0 / complex(w - wc, g)
        - 1.0 / complex(w - wc, -g)
    )
    return 0.5j * braces


def integrand_from_poles(params: ReducedParams, omega, t) -> float:
    """Folded full-quantum Ohmic MSD integrand rebuilt from the four simple poles."""
    w = abs(float(omega))
    if w == 0.0 or t == 0:
        raise DomainError("pole form is evaluated at omega != 0 and t > 0 only")
    weight = 1.0 / math.tanh(w / params.omega_th) if params.omega_th > 0 else 1.0
    s = math.sin(0.5 * w * t)
    # hbar / (pi m) in front of the pole sum, doubled by the fold onto w > 0
    pref = 2.0 * params.hbar / (math.pi * params.mass)
    return pref * weight / w * four_pole_sum(params, omega).real * 2.0 * s * s
