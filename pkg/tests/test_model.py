import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from qbm.errors import InvariantError
from qbm.model import (
    Ohmic,
    PhysicalInputs,
    ReducedParams,
    SingleRelaxation,
    derive_reduced,
    kernel_fourier,
)

finite = dict(allow_nan=False, allow_infinity=False)


def inputs(**kw):
    base = dict(charge=1.0, field=2.0, mass=1.0, light_speed=1.0, temperature=0.5, gamma=1.0, hbar=1.0, k_boltzmann=1.0)
    base.update(kw)
    return PhysicalInputs(**base)


def test_derive_reduced_examples():
    assert derive_reduced(inputs(charge=0.0, field=7.0)).omega_c == 0
    assert derive_reduced(inputs(temperature=0.0)).omega_th == 0
    r = derive_reduced(inputs(charge=1.0, field=2.0, mass=1.0, light_speed=1.0))
    assert r.omega_c == 2.0
    assert r.omega_th == pytest.approx(2 * 1.0 * 0.5 / 1.0)
    assert (r.gamma, r.mass, r.hbar) == (1.0, 1.0, 1.0)


def test_negative_charge_gives_same_magnitude():
    assert derive_reduced(inputs(charge=-3.0)).omega_c == derive_reduced(inputs(charge=3.0)).omega_c


@pytest.mark.parametrize("bad", [dict(mass=0.0), dict(light_speed=-1.0), dict(temperature=-1.0), dict(field=-0.1), dict(hbar=0.0), dict(k_boltzmann=math.nan)])
def test_physical_inputs_invariants(bad):
    with pytest.raises(InvariantError):
        inputs(**bad)


@pytest.mark.parametrize("bad", [dict(gamma=0.0), dict(omega_c=-1.0), dict(omega_th=-1e-9), dict(mass=-1.0), dict(hbar=0.0), dict(gamma=math.inf)])
def test_reduced_params_invariants(bad):
    kw = dict(gamma=1.0)
    kw.update(bad)
    with pytest.raises(InvariantError):
        ReducedParams(**kw)


def test_reduced_params_helpers():
    p = ReducedParams(gamma=2.0, omega_c=1.0, omega_th=4.0, hbar=0.5)
    assert p.kT == pytest.approx(1.0)
    assert p.replace(omega_c=3.0).omega_c == 3.0
    assert p.as_dict()["omega_th"] == 4.0


def test_kernel_examples():
    assert kernel_fourier(Ohmic(1.0), 7.3) == 1 + 0j
    assert kernel_fourier(SingleRelaxation(1.0, 2.0), 0.0) == 1 + 0j
    assert kernel_fourier(SingleRelaxation(1.0, 2.0), 1.0) == pytest.approx(0.2 + 0.4j, rel=1e-15)


@pytest.mark.parametrize("tau, omega", [(2.0, 1.0), (0.1, 3.0), (0.5, -4.0)])
def test_kernel_against_fourier_integral(tau, omega):
    # K(t) = (gamma / tau) exp(-t / tau), transformed with exp(+i omega t)
    gamma = 1.3
    re = integrate.quad(lambda t: gamma / tau * math.exp(-t / tau) * math.cos(omega * t), 0, np.inf, limit=500)[0]
    im = integrate.quad(lambda t: gamma / tau * math.exp(-t / tau) * math.sin(omega * t), 0, np.inf, limit=500)[0]
    assert kernel_fourier(SingleRelaxation(gamma, tau), omega) == pytest.approx(complex(re, im), rel=1e-9)


def test_kernel_invariants_reject_bad_values():
    with pytest.raises(InvariantError):
        SingleRelaxation(1.0, 0.0)
    with pytest.raises(InvariantError):
        Ohmic(-1.0)
    with pytest.raises(TypeError):
        kernel_fourier("ohmic", 1.0)


@given(st.floats(0.01, 100, **finite), st.floats(1e-4, 10, **finite), st.floats(-1e4, 1e4, **finite))
def test_kernel_properties(gamma, tau, omega):
    for model in (Ohmic(gamma), SingleRelaxation(gamma, tau)):
        k = kernel_fourier(model, omega)
        assert k.real > 0
        assert kernel_fourier(model, -omega) == k.conjugate()


@given(st.floats(0.01, 100, **finite), st.floats(1e-4, 10, **finite), st.floats(0, 1, **finite))
def test_srt_approaches_ohmic(gamma, tau, wt):
    omega = wt / tau
    assert abs(kernel_fourier(SingleRelaxation(gamma, tau), omega) - gamma) <= gamma * wt * (1 + 1e-12)
