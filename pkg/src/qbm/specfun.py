"""Complex special functions used by the residue-sum closed form.

All functions take Python ``complex`` (or anything ``complex()`` accepts) and
return ``complex``. Non-finite arguments are rejected with
:class:`~qbm.errors.DomainError`; arguments within ``POLE_TOLERANCE`` of a
pole raise :class:`~qbm.errors.PoleError` instead of returning huge values.
"""
import cmath
import math
from fractions import Fraction
from functools import lru_cache

from scipy.special import zeta as _zeta

from qbm.errors import DomainError, PoleError

POLE_TOLERANCE = 1e-8

_EULER_GAMMA = 0.57721566490153286061

# digamma: shift upward until |z| reaches this, then use the asymptotic series
_PSI_ASYMPTOTIC_RADIUS = 10.0
# harmonic_number: below this radius use the Taylor series about x = 0
_H_TAYLOR_RADIUS = 0.25
# lerch_phi: direct series for |z| <= this, Euler-Maclaurin tail beyond
_LERCH_DIRECT_RADIUS = 0.5
# lerch_phi: Euler-Maclaurin starts once Re(n + alpha) reaches this
_LERCH_EM_SHIFT = 25.0

_EPS = 2.0 ** -53


def euler_mascheroni():
    """Euler-Mascheroni constant, lim (H_n - ln n)."""
    return _EULER_GAMMA


def _as_complex(z, name="z"):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return z


def _nonpositive_integer_pole(z, name):
    n = round(z.real)
    if n <= 0 and abs(z - n) < POLE_TOLERANCE:
        raise PoleError(f"{name}={z!r} is within {POLE_TOLERANCE:g} of the pole at {n}")


@lru_cache(maxsize=None)
def _bernoulli_even(kmax):
    """Return floats B_{2k} / (2k)! for k = 1..kmax (exact rationals first)."""
    # Akiyama-Tanigawa yields B_n with B_1 = +1/2; only even indices are used.
    nmax = 2 * kmax
    a = [Fraction(0)] * (nmax + 1)
    b = []
    for m in range(nmax + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        b.append(a[0])
    out = []
    fact = 1
    for k in range(1, kmax + 1):
        fact *= (2 * k - 1) * (2 * k)
        out.append(float(b[2 * k] / fact))
    return tuple(out)


# B_{2k} / (2k) for the digamma asymptotic series, k = 1..10
_PSI_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
)


def _cot_pi(z):
    # cot(w) = i coth(i w); cmath.tanh saturates instead of overflowing
    return 1j / cmath.tanh(1j * math.pi * z)


def _digamma(z):
    if z.real < 0.5:
        return _digamma(1.0 - z) - math.pi * _cot_pi(z)
    shift = 0j
    while abs(z) < _PSI_ASYMPTOTIC_RADIUS:
        shift -= 1.0 / z
        z += 1.0
    w = 1.0 / (z * z)
    series = 0j
    for c in reversed(_PSI_COEFFS):
        series = series * w + c
    return cmath.log(z) - 0.5 / z - series * w + shift


def digamma(z):
    """Digamma function psi(z) for complex ``z``.

    Upward recurrence psi(z) = psi(z + 1) - 1/z until ``|z| >= 10``, then the
    Stirling-type asymptotic series; reflection for ``Re z < 1/2``.

    Raises
    ------
    PoleError
        If ``z`` is within ``POLE_TOLERANCE`` of a non-positive integer.
    """
    z = _as_complex(z)
    _nonpositive_integer_pole(z, "z")
    return _digamma(z)


@lru_cache(maxsize=None)
def _harmonic_taylor_coeffs(n):
    # H_x = sum_{k>=2} (-1)^k zeta(k) x^(k-1)
    return tuple(((-1) ** k) * float(_zeta(k, 1)) for k in range(2, n + 2))


def harmonic_number(x):
    """Harmonic number H_x continued to complex ``x``.

    H_x = gamma_0 + psi(x + 1); near the origin the Taylor series in the
    Riemann zeta values is used so that H_x ~ (pi^2/6) x keeps full relative
    accuracy.

    Raises
    ------
    PoleError
        At negative integers.
    """
    x = _as_complex(x, "x")
    if abs(x) <= _H_TAYLOR_RADIUS:
        acc = 0j
        for c in reversed(_harmonic_taylor_coeffs(30)):
            acc = acc * x + c
        return acc * x
    _nonpositive_integer_pole(x + 1.0, "x + 1")
    return _EULER_GAMMA + _digamma(x + 1.0)


def coth_c(z):
    """Complex hyperbolic cotangent, saturating to +-1 for large ``|Re z|``.

    Raises
    ------
    PoleError
        Within ``POLE_TOLERANCE`` of ``i n pi``.
    """
    z = _as_complex(z)
    n = round(z.imag / math.pi)
    if abs(z - 1j * n * math.pi) < POLE_TOLERANCE:
        raise PoleError(f"coth pole near {n}*i*pi (z={z!r})")
    return 1.0 / cmath.tanh(z)


def _exp1_scaled(w):
    """Return exp(w) * E1(w) on the principal branch."""
    if abs(w) < 1.0:
        # E1(w) = -gamma - log w - sum_{k>=1} (-w)^k / (k k!)
        term = 1.0 + 0j
        acc = 0j
        k = 1
        while True:
            term *= -w / k
            inc = term / k
            acc += inc
            if abs(inc) <= _EPS * abs(acc) or k > 200:
                break
            k += 1
        return cmath.exp(w) * (-_EULER_GAMMA - cmath.log(w) - acc)
    # even continued fraction (modified Lentz)
    tiny = 1e-300
    b = w + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 20000):
        an = -float(i * i)
        b += 2.0
        d = an * d + b
        if d == 0:
            d = tiny
        c = b + an / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge at w={w!r}")


def _lerch_direct(z, alpha, n0):
    acc = 0j
    zn = 1.0 + 0j
    az = abs(z)
    n = 0
    while True:
        term = zn / (n + alpha)
        acc += term
        n += 1
        zn *= z
        if n > n0:
            tail_bound = abs(zn) / ((1.0 - az) * abs(n + alpha))
            if tail_bound <= _EPS * abs(acc) * 0.125 or tail_bound < 1e-300:
                return acc
        if n > n0 + 5000:
            return acc


def _lerch_euler_maclaurin(z, alpha):
    lam = cmath.log(z)
    nshift = max(0, math.ceil(_LERCH_EM_SHIFT - alpha.real))
    head = 0j
    zn = 1.0 + 0j
    for n in range(nshift):
        head += zn / (n + alpha)
        zn *= z
    # tail = sum_{n>=N} e^{lam n}/(n+alpha)
    #      = e^{lam N} [ e^w E1(w) + 1/(2a) - sum_k B_2k/(2k)! h_{2k-1} ]
    # with a = N + alpha, w = -lam a, and h_m = e^{-lam N} f^{(m)}(N) obeying
    # a h_m + m h_{m-1} = lam^m.
    a = nshift + alpha
    tail = _exp1_scaled(-lam * a) + 0.5 / a
    bern = _bernoulli_even(60)
    h = 1.0 / a
    lam_pow = 1.0 + 0j
    prev = math.inf
    for m in range(1, 2 * len(bern)):
        lam_pow *= lam
        h = (lam_pow - m * h) / a
        if m % 2 == 0:
            continue
        term = bern[(m + 1) // 2 - 1] * h
        size = abs(term)
        if size > prev and m > 3:
            break
        tail -= term
        prev = size
        if size <= _EPS * 0.125 * abs(tail):
            break
    return head + zn * tail


def lerch_phi(z, alpha):
    """Hurwitz-Lerch transcendent of order one, sum_{n>=0} z^n / (n + alpha).

    Parameters
    ----------
    z : complex
        Must satisfy ``|z| < 1``.
    alpha : complex
        Must not be a non-positive integer.

    Notes
    -----
    For ``|z| <= 1/2`` the defining series converges fast enough to be summed
    directly. Closer to the unit circle the first terms are summed until
    ``Re(n + alpha) >= 25`` (the shift recurrence, unrolled) and the remainder
    is evaluated with the Euler-Maclaurin formula, whose integral term is an
    exponential integral.

    Raises
    ------
    DomainError
        If ``|z| >= 1``.
    PoleError
        If ``alpha + n`` is within ``POLE_TOLERANCE`` of zero for some n >= 0.
    """
    z = _as_complex(z)
    alpha = _as_complex(alpha, "alpha")
    if abs(z) >= 1.0:
        raise DomainError(f"lerch_phi requires |z| < 1, got |z|={abs(z)!r}")
    n = round(-alpha.real)
    if n >= 0 and abs(alpha + n) < POLE_TOLERANCE:
        raise PoleError(f"alpha={alpha!r} is within {POLE_TOLERANCE:g} of -{n}")
    if z == 0:
        return 1.0 / alpha
    if abs(z) <= _LERCH_DIRECT_RADIUS:
        return _lerch_direct(z, alpha, max(0, math.ceil(-alpha.real)))
    return _lerch_euler_maclaurin(z, alpha)
