import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbm import quadrature
from qbm.closedform import msd_exact_ohmic
from qbm.errors import ConvergenceError, DomainError, InvariantError
from qbm.limits import msd_high_temperature, msd_low_temperature
from qbm.model import Ohmic, ReducedParams, SingleRelaxation
from qbm.quadrature import (
    QuadratureSettings,
    TemperatureMode,
    msd_integrand,
    msd_quadrature,
    msd_quadrature_reference,
)

FQ, HIGH, LOW = TemperatureMode.FULL_QUANTUM, TemperatureMode.HIGH_T, TemperatureMode.LOW_T
finite = dict(allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("omega", [0.0, 0.3, 17.0])
@pytest.mark.parametrize("mode", [FQ, HIGH, LOW])
def test_integrand_vanishes_at_t0(omega, mode):
    p = ReducedParams(1.0, 2.0, 3.0)
    assert msd_integrand(p, Ohmic(1.0), omega, 0.0, mode) == 0.0


@pytest.mark.parametrize("kernel", [Ohmic(1.0), SingleRelaxation(1.0, 0.5)])
@pytest.mark.parametrize("mode", [FQ, HIGH])
def test_integrand_zero_frequency_limit(kernel, mode):
    p = ReducedParams(1.0, 0.7, 2.5)
    at_zero = msd_integrand(p, kernel, 0.0, 1.3, mode)
    near = msd_integrand(p, kernel, 1e-6, 1.3, mode)
    assert at_zero == pytest.approx(near, rel=1e-10)


def test_integrand_high_t_reduction():
    gamma, wth, t = 1.4, 30.0, 2.2
    p = ReducedParams(gamma, 0.0, wth)
    for w in (0.01, 0.5, 3.0, 40.0):
        expected = (2 * wth * gamma / math.pi) * 2.0 * (1 - math.cos(w * t)) / (w * w * (w * w + gamma * gamma))
        assert msd_integrand(p, Ohmic(gamma), w, t, HIGH) == pytest.approx(expected, rel=1e-13)


def test_integrand_is_even():
    p = ReducedParams(1.0, 3.0, 1.0)
    k = SingleRelaxation(1.0, 0.2)
    assert msd_integrand(p, k, -2.5, 1.0) == msd_integrand(p, k, 2.5, 1.0)


def test_integrand_rejects_negative_t():
    with pytest.raises(DomainError):
        msd_integrand(ReducedParams(1.0), Ohmic(1.0), 1.0, -1.0)


def test_msd_at_zero_time():
    for mode in (FQ, HIGH, LOW):
        assert msd_quadrature(ReducedParams(1.0, 3.0, 2.0), SingleRelaxation(1.0, 0.1), 0.0, mode) == 0.0


def test_matches_closed_form_example():
    p = ReducedParams(1.0, 0.5, 10.0)
    assert msd_quadrature(p, Ohmic(1.0), 2.0) == pytest.approx(msd_exact_ohmic(p, 2.0), rel=1e-6)


def test_high_t_example():
    p = ReducedParams(1.0, 0.0, 200.0)
    expected = 400.0 * (5 - 1 + math.exp(-5))
    assert msd_quadrature(p, Ohmic(1.0), 5.0, HIGH) == pytest.approx(expected, rel=1e-8)
    assert expected == pytest.approx(1602.695, abs=1e-3)


@pytest.mark.parametrize("wc", [0.0, 0.3, 4.0, 25.0])
@pytest.mark.parametrize("t", [0.05, 1.0, 30.0])
def test_high_t_mode_reproduces_classical_formula(wc, t):
    p = ReducedParams(1.0, wc, 7.0)
    assert msd_quadrature(p, Ohmic(1.0), t, HIGH) == pytest.approx(msd_high_temperature(p, t), rel=1e-7)


@pytest.mark.parametrize("t", [1e2, 1e3, 1e4])
def test_low_t_long_times(t):
    # the zero-temperature asymptote becomes exact as t grows; measured
    # corrections are about 0.2 / t^2 here
    p = ReducedParams(1.0, 0.0, 0.0)
    assert msd_quadrature(p, Ohmic(1.0), t, LOW) == pytest.approx(msd_low_temperature(p, t), rel=1.0 / t ** 2)


def test_monotone_in_temperature():
    temps = (0.0, 0.1, 1.0, 10.0, 100.0)
    for wc in (0.0, 0.5, 2.0, 5.0, 20.0):
        for t in (0.1, 0.5, 2.0, 5.0, 20.0):
            values = [msd_quadrature(ReducedParams(1.0, wc, w), Ohmic(1.0), t) for w in temps]
            assert all(b >= a * (1 - 1e-9) for a, b in zip(values, values[1:])), (wc, t, values)


def test_srt_approaches_ohmic():
    for wc, wth in ((0.0, 1.0), (5.0, 0.05), (1.0, 100.0)):
        p = ReducedParams(1.0, wc, wth)
        for t in (0.1, 2.0, 20.0):
            a = msd_quadrature(p, SingleRelaxation(1.0, 1e-3), t)
            b = msd_quadrature(p, Ohmic(1.0), t)
            assert a == pytest.approx(b, rel=0.01)


@pytest.mark.parametrize("wc", [0.0, 1.0, 8.0])
@pytest.mark.parametrize("t", [0.05, 1.0, 10.0])
def test_mode_consistency(wc, t):
    p_hot = ReducedParams(1.0, wc, 100.0 * max(1.0, wc, 1.0 / t))
    assert msd_quadrature(p_hot, Ohmic(1.0), t) == pytest.approx(msd_quadrature(p_hot, Ohmic(1.0), t, HIGH), rel=0.01)
    p_cold = ReducedParams(1.0, wc, 0.0)
    k = SingleRelaxation(1.0, 0.3)
    assert msd_quadrature(p_cold, k, t) == pytest.approx(msd_quadrature(p_cold, k, t, LOW), rel=1e-8)


@pytest.mark.parametrize(
    "params, kernel, mode, t",
    [
        (ReducedParams(1.0, 0.5, 10.0), Ohmic(1.0), FQ, 2.0),
        (ReducedParams(1.0, 3.0, 0.5), SingleRelaxation(1.0, 0.3), FQ, 1.5),
        (ReducedParams(1.0, 2.0, 0.0), SingleRelaxation(1.0, 0.3), LOW, 4.0),
        (ReducedParams(1.0, 2.0, 5.0), Ohmic(1.0), HIGH, 3.0),
    ],
)
def test_fold_matches_two_sided_reference(params, kernel, mode, t):
    ref = msd_quadrature_reference(params, kernel, t, mode)
    folded = msd_quadrature(params, kernel, t, mode)
    assert abs(ref.imag) <= 1e-8 * folded
    assert ref.real == pytest.approx(folded, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 10, **finite), st.floats(0, 30, **finite), st.floats(0, 200, **finite),
       st.floats(1e-3, 50, **finite), st.sampled_from([None, 0.01, 0.5]))
def test_nonnegative(gamma, wc, wth, t, tau):
    p = ReducedParams(gamma, wc, wth)
    kernel = Ohmic(gamma) if tau is None else SingleRelaxation(gamma, tau)
    value = msd_quadrature(p, kernel, t)
    assert value >= 0 and math.isfinite(value)


def test_settings_invariants():
    with pytest.raises(InvariantError):
        QuadratureSettings(rel_tol=0.0)
    with pytest.raises(InvariantError):
        QuadratureSettings(rel_tol=1e-2)
    with pytest.raises(InvariantError):
        QuadratureSettings(max_subdivisions=50)


def test_high_t_mode_needs_temperature():
    with pytest.raises(InvariantError):
        msd_quadrature(ReducedParams(1.0, 1.0, 0.0), Ohmic(1.0), 1.0, HIGH)


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        msd_quadrature(ReducedParams(1.0), Ohmic(1.0), -0.5)


def test_convergence_error_reports_achieved(monkeypatch):
    def sloppy(*args, **kwargs):
        return 1.0, 0.5

    monkeypatch.setattr(quadrature.integrate, "quad", sloppy)
    with pytest.raises(ConvergenceError) as info:
        msd_quadrature(ReducedParams(1.0, 1.0, 1.0), Ohmic(1.0), 2.0)
    assert info.value.achieved > 1e-3
