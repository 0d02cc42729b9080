import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbm import closedform
from qbm.closedform import (
    four_pole_sum,
    integrand_from_poles,
    msd_closed_form,
    msd_exact_ohmic,
    msd_exact_ohmic_detailed,
    residue_breakdown,
    residue_i1,
    residue_i2,
    residue_i3,
    residue_i4,
    t_min,
)
from qbm.errors import DomainError, PoleCoincidenceError
from qbm.limits import high_temperature_slope, msd_high_temperature
from qbm.model import Ohmic, ReducedParams
from qbm.quadrature import msd_quadrature


def matsubara_sum(c, x, n_terms=10 ** 6):
    """sum_{n>=1} (1 - x^n) (1/n - 1/(n + c)), summed term by term.

    The tail beyond ``n_terms`` (where x^n is negligible) is the midpoint
    integral of c / (n (n + c)), i.e. log(1 + c / (N + 1/2)).
    """
    n = np.arange(1, n_terms + 1, dtype=float)
    terms = (1.0 - x ** n) * (c / (n * (n + c)))
    tail = np.log(1.0 + c / (n_terms + 0.5))
    return complex(math.fsum(terms.real), math.fsum(terms.imag)) + tail


CASES = [
    ReducedParams(gamma=1.0, omega_c=0.0, omega_th=1.0),
    ReducedParams(gamma=1.0, omega_c=2.0, omega_th=0.7),
    ReducedParams(gamma=0.5, omega_c=10.0, omega_th=5.0),
]


@pytest.mark.parametrize("p", CASES)
@pytest.mark.parametrize("t", [0.3, 2.0])
def test_matsubara_only_residues_match_brute_force(p, t):
    big_p = math.pi * p.omega_th
    x = math.exp(-big_p * t)
    pc, qc = complex(p.gamma, p.omega_c), complex(p.gamma, -p.omega_c)
    i2 = -2j * math.pi * (-matsubara_sum(pc / big_p, x) / (2 * math.pi * pc))
    i4 = -2j * math.pi * (-matsubara_sum(qc / big_p, x) / (2 * math.pi * qc))
    assert abs(residue_i2(p, t) - i2) <= 1e-9 * abs(i2)
    assert abs(residue_i4(p, t) - i4) <= 1e-9 * abs(i4)


@pytest.mark.parametrize("p", CASES)
@pytest.mark.parametrize("t", [0.3, 2.0])
def test_residues_with_cyclotron_pole_match_brute_force(p, t):
    big_p = math.pi * p.omega_th
    x = math.exp(-big_p * t)
    g, wc = p.gamma, p.omega_c
    pc, qc = complex(g, wc), complex(g, -wc)
    lin = big_p * t  # origin term, pi t omega_th / a_k after the prefactor

    def cyclotron(a_conj_sign):
        a = complex(wc, g * a_conj_sign)
        coth = 1 / cmath.tanh(a / p.omega_th)
        phase = cmath.exp(complex(-g * t, a_conj_sign * wc * t))
        return (1 - phase) * coth / (2 * a)

    i1 = -2j * math.pi * ((matsubara_sum(-qc / big_p, x) + lin) / (2 * math.pi * qc) + cyclotron(+1))
    i3 = -2j * math.pi * ((matsubara_sum(-pc / big_p, x) + lin) / (2 * math.pi * pc) + cyclotron(-1))
    assert abs(residue_i1(p, t) - i1) <= 1e-9 * abs(i1)
    assert abs(residue_i3(p, t) - i3) <= 1e-9 * abs(i3)


@pytest.mark.parametrize("p", CASES)
def test_breakdown_assembles_to_closed_form(p):
    t = 1.7
    b = residue_breakdown(p, t)
    # i * (I1 - I2 + I3 - I4) is real, so the assembled sum is purely imaginary
    assert abs(b.assembled.real) <= 1e-9 * abs(b.assembled)
    assert b.msd == pytest.approx(msd_closed_form(p, t).real, rel=1e-10)
    assert b.msd == pytest.approx(msd_quadrature(p, Ohmic(p.gamma), t), rel=1e-8)


def test_closed_form_matches_quadrature_at_zero_field():
    p = ReducedParams(gamma=1.0, omega_c=0.0, omega_th=1.0)
    for t in (0.05, 0.5, 5.0, 50.0):
        assert msd_exact_ohmic(p, t) == pytest.approx(msd_quadrature(p, Ohmic(1.0), t), rel=1e-9)


def test_high_temperature_limit_reached():
    # omega_c = 0, omega_th = 1000: quantum corrections are ~ (gamma / omega_th)^2
    p = ReducedParams(gamma=1.0, omega_c=0.0, omega_th=1000.0)
    assert msd_exact_ohmic(p, 5.0) == pytest.approx(msd_high_temperature(p, 5.0), rel=5e-3)


@pytest.mark.parametrize("wc", [0.0, 1.0, 10.0])
def test_long_time_slope_is_classical(wc):
    # the diffusion constant is set by the omega -> 0 weight, where
    # coth(w / W) ~ W / w is exact
    p = ReducedParams(gamma=1.0, omega_c=wc, omega_th=0.5)
    t1, t2 = 200.0, 400.0
    slope = (msd_exact_ohmic(p, t2) - msd_exact_ohmic(p, t1)) / (t2 - t1)
    assert slope == pytest.approx(high_temperature_slope(p), rel=1e-6)


def test_scales_with_hbar_over_mass():
    p = ReducedParams(gamma=1.0, omega_c=3.0, omega_th=2.0)
    base = msd_exact_ohmic(p, 1.3)
    assert msd_exact_ohmic(p.replace(hbar=3.0), 1.3) == pytest.approx(3.0 * base, rel=1e-12)
    assert msd_exact_ohmic(p.replace(mass=4.0), 1.3) == pytest.approx(base / 4.0, rel=1e-12)


def test_small_t_falls_back_to_quadrature():
    p = ReducedParams(gamma=1.0, omega_c=1.0, omega_th=1.0)
    t = 0.5 * t_min(p)
    res = msd_exact_ohmic_detailed(p, t)
    assert res.fallback == "quadrature:t<t_min"
    assert res.msd == pytest.approx(msd_quadrature(p, Ohmic(1.0), t), rel=1e-12)
    assert msd_exact_ohmic_detailed(p, 2 * t_min(p)).fallback == ""


def test_pole_coincidence():
    # (gamma + i omega_c) / (pi omega_th) = 2 exactly when omega_c = 0, gamma = 2 pi omega_th
    p = ReducedParams(gamma=2 * math.pi, omega_c=0.0, omega_th=1.0)
    with pytest.raises(PoleCoincidenceError):
        msd_closed_form(p, 1.0)
    res = msd_exact_ohmic_detailed(p, 1.0)
    assert res.fallback == "quadrature:pole_coincidence"
    assert res.msd == pytest.approx(msd_quadrature(p, Ohmic(p.gamma), 1.0), rel=1e-12)
    # slightly off the coincidence the closed form is continuous with the fallback
    near = msd_exact_ohmic_detailed(p.replace(gamma=2 * math.pi * (1 + 1e-4)), 1.0)
    assert near.fallback == ""
    assert near.msd == pytest.approx(res.msd, rel=1e-3)


@pytest.mark.parametrize("t", [0.0, -1.0, math.inf, math.nan])
def test_domain_errors_in_t(t):
    p = ReducedParams(gamma=1.0, omega_c=1.0, omega_th=1.0)
    with pytest.raises(DomainError):
        msd_exact_ohmic(p, t)


def test_zero_temperature_rejected():
    with pytest.raises(DomainError):
        msd_exact_ohmic(ReducedParams(gamma=1.0, omega_c=1.0, omega_th=0.0), 1.0)


@settings(max_examples=200, deadline=None)
@given(
    g=st.floats(0.05, 20.0),
    wc=st.floats(0.0, 20.0),
    w=st.floats(-50.0, 50.0).filter(lambda v: abs(v) > 1e-6),
)
def test_four_pole_sum_is_real_and_matches_direct_form(g, wc, w):
    p = ReducedParams(gamma=g, omega_c=wc, omega_th=1.0)
    s = four_pole_sum(p, w)
    a = w
    num = a * a + wc * wc + g * g
    den = ((a - wc) ** 2 + g * g) * ((a + wc) ** 2 + g * g)
    ref = 2 * g * num / den
    assert abs(s.imag) <= 1e-12 * abs(ref)
    assert s.real == pytest.approx(ref, rel=1e-10)


def test_integrand_from_poles_domain():
    p = ReducedParams(gamma=1.0, omega_c=1.0, omega_th=1.0)
    with pytest.raises(DomainError):
        integrand_from_poles(p, 0.0, 1.0)
    with pytest.raises(DomainError):
        integrand_from_poles(p, 1.0, 0.0)
    assert integrand_from_poles(p, -2.0, 1.0) == integrand_from_poles(p, 2.0, 1.0)


def test_t_min_scale():
    p = ReducedParams(gamma=1.0, omega_c=50.0, omega_th=1.0)
    assert t_min(p) == pytest.approx(closedform.T_MIN_FACTOR / 50.0)
