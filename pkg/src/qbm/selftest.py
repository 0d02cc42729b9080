"""Self-consistency suite behind ``qbm selftest``.

Each group returns ``(passed, first_failure)``; the report is deterministic
(fixed random seeds, no timings) so two runs print identical text.
"""
import cmath
import math
from contextlib import contextmanager

import numpy as np

from qbm import closedform, quadrature, specfun
from qbm.model import Ohmic, ReducedParams

SEED = 20240607


def _rng(offset):
    return np.random.default_rng(SEED + offset)


def _random_complex(rng, rmin, rmax, right_half=True):
    r = math.exp(rng.uniform(math.log(rmin), math.log(rmax)))
    lim = math.pi / 2 if right_half else math.pi
    theta = rng.uniform(-lim, lim)
    return cmath.rect(r, theta)


def check_digamma_recurrence(n=2000):
    rng = _rng(1)
    for _ in range(n):
        z = _random_complex(rng, 0.1, 100.0)
        if z.real <= 0:
            continue
        lhs = specfun.digamma(z + 1) - specfun.digamma(z)
        if abs(lhs - 1 / z) > 1e-12 * abs(1 / z):
            return False, f"z={z!r}: psi(z+1)-psi(z)={lhs!r}, 1/z={1 / z!r}"
    return True, ""


def check_harmonic_integers():
    total = []
    for n in range(1, 1001):
        total.append(1.0 / n)
        ref = math.fsum(total)
        got = specfun.harmonic_number(n)
        if abs(got - ref) > 1e-14 * ref:
            return False, f"n={n}: H={got!r}, sum={ref!r}"
    return True, ""


def check_lerch_shift(n=300):
    rng = _rng(2)
    for _ in range(n):
        z = cmath.rect(0.95 * math.sqrt(rng.uniform()), rng.uniform(-math.pi, math.pi))
        a = complex(rng.uniform(0.2, 10.0), rng.uniform(-10.0, 10.0))
        resid = specfun.lerch_phi(z, a) - z * specfun.lerch_phi(z, a + 1) - 1 / a
        if not abs(resid) <= 1e-11:
            return False, f"z={z!r}, alpha={a!r}: residual {abs(resid):.3e}"
    return True, ""


def check_harmonic_asymptotics():
    g0 = specfun.euler_mascheroni()
    for theta in np.linspace(-1.5, 1.5, 7):
        x = cmath.rect(1e4, theta)
        err = abs(specfun.harmonic_number(x) - (cmath.log(x) + g0))
        if not err <= 1 / (2 * abs(x)) + 1e-10:
            return False, f"large x={x!r}: deviation {err:.3e}"
    for theta in np.linspace(-math.pi, math.pi, 9):
        x = cmath.rect(1e-4, theta)
        err = abs(specfun.harmonic_number(x) - math.pi ** 2 / 6 * x)
        if not err <= 2 * abs(x) ** 2:
            return False, f"small x={x!r}: deviation {err:.3e}"
    return True, ""


def check_partial_fractions(n=100):
    rng = _rng(3)
    for _ in range(n):
        omega = rng.uniform(-50.0, 50.0)
        params = ReducedParams(gamma=rng.uniform(0.05, 20.0), omega_c=rng.uniform(0.0, 20.0), omega_th=rng.uniform(0.05, 100.0))
        t = rng.uniform(0.1, 20.0)
        direct = quadrature.msd_integrand(params, Ohmic(params.gamma), omega, t)
        poles = closedform.integrand_from_poles(params, omega, t)
        if abs(direct - poles) > 1e-12 * abs(direct):
            return False, f"{params}, omega={omega!r}, t={t!r}: {direct!r} vs {poles!r}"
    return True, ""


ORACLE_OMEGA_C = (0.0, 0.2, 1.0, 5.0, 20.0)
ORACLE_OMEGA_TH = (0.05, 1.0, 100.0)
ORACLE_T = (0.1, 1.0, 5.0, 20.0)


def check_oracle_grid():
    for wc in ORACLE_OMEGA_C:
        for wth in ORACLE_OMEGA_TH:
            p = ReducedParams(gamma=1.0, omega_c=wc, omega_th=wth)
            for t in ORACLE_T:
                exact = closedform.msd_closed_form(p, t)
                quad = quadrature.msd_quadrature(p, Ohmic(1.0), t)
                if abs(exact.imag) > closedform.IMAG_TOL * abs(exact.real):
                    return False, f"omega_c={wc}, omega_th={wth}, t={t}: imaginary part {exact.imag:.3e}"
                if abs(exact.real - quad) > 1e-6 * quad + 1e-10:
                    return False, f"omega_c={wc}, omega_th={wth}, t={t}: closed form {exact.real!r} vs quadrature {quad!r}"
    return True, ""


GROUPS = (
    ("digamma-recurrence", check_digamma_recurrence),
    ("harmonic-integers", check_harmonic_integers),
    ("lerch-shift-identity", check_lerch_shift),
    ("harmonic-asymptotics", check_harmonic_asymptotics),
    ("partial-fractions", check_partial_fractions),
    ("oracle-grid", check_oracle_grid),
)


@contextmanager
def lerch_fault(scale=1.0 + 1e-6):
    """Temporarily perturb :func:`qbm.specfun.lerch_phi` (fault-injection hook)."""
    original = specfun.lerch_phi

    def perturbed(z, alpha):
        return original(z, alpha) * scale

    specfun.lerch_phi = perturbed
    try:
        yield
    finally:
        specfun.lerch_phi = original


def run(out):
    """Run every group, print one line per group to ``out``; return True if all pass."""
    ok = True
    for name, check in GROUPS:
        try:
            passed, detail = check()
        except Exception as exc:  # an exception is a failing case, not a crash
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        print(f"{'PASS' if passed else 'FAIL'} {name}" + (f": {detail}" if detail else ""), file=out)
        ok = ok and passed
    return ok
