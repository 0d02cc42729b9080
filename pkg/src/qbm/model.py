"""Physical parameters, unit reduction and memory-kernel models.

Every formula in the package consumes only :class:`ReducedParams`, the
quintuple (gamma, omega_c, omega_th, mass, hbar). ``omega_th = 0`` is the
exact zero-temperature limit.
"""
import math
from dataclasses import dataclass, asdict
from typing import Union

from qbm.errors import InvariantError


def _require(cond, message):
    if not cond:
        raise InvariantError(message)


def _finite(**values):
    for name, v in values.items():
        _require(isinstance(v, (int, float)) and math.isfinite(v), f"{name} must be a finite real, got {v!r}")


@dataclass(frozen=True)
class ReducedParams:
    """Reduced physical state.

    Attributes
    ----------
    gamma : float
        Friction rate (> 0).
    omega_c : float
        Cyclotron frequency q B / (m c) (>= 0).
    omega_th : float
        Thermal frequency 2 k_B T / hbar (>= 0).
    mass, hbar : float
        Particle mass and reduced Planck constant (> 0).
    """

    gamma: float
    omega_c: float = 0.0
    omega_th: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        _finite(gamma=self.gamma, omega_c=self.omega_c, omega_th=self.omega_th, mass=self.mass, hbar=self.hbar)
        _require(self.gamma > 0, f"gamma must be > 0, got {self.gamma}")
        _require(self.omega_c >= 0, f"omega_c must be >= 0, got {self.omega_c}")
        _require(self.omega_th >= 0, f"omega_th must be >= 0, got {self.omega_th}")
        _require(self.mass > 0, f"mass must be > 0, got {self.mass}")
        _require(self.hbar > 0, f"hbar must be > 0, got {self.hbar}")

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return ReducedParams(**values)

    @property
    def kT(self):
        """Thermal energy k_B T = hbar * omega_th / 2."""
        return 0.5 * self.hbar * self.omega_th

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PhysicalInputs:
    """Dimensional inputs in Gaussian units."""

    charge: float
    field: float
    mass: float
    light_speed: float
    temperature: float
    gamma: float
    hbar: float
    k_boltzmann: float

    def __post_init__(self):
        _finite(**asdict(self))
        _require(self.mass > 0, "mass must be > 0")
        _require(self.light_speed > 0, "light_speed must be > 0")
        _require(self.hbar > 0, "hbar must be > 0")
        _require(self.k_boltzmann > 0, "k_boltzmann must be > 0")
        _require(self.temperature >= 0, "temperature must be >= 0")
        _require(self.field >= 0, "field must be >= 0")


def derive_reduced(inputs: PhysicalInputs) -> ReducedParams:
    """Reduce dimensional inputs: omega_c = qB/(mc), omega_th = 2 k_B T / hbar.

    A negative charge gives the same orbit traversed the other way; the MSD
    depends on omega_c only through omega_c**2, so its magnitude is kept.
    """
    omega_c = abs(inputs.charge * inputs.field / (inputs.mass * inputs.light_speed))
    omega_th = 2.0 * inputs.k_boltzmann * inputs.temperature / inputs.hbar
    return ReducedParams(
        gamma=inputs.gamma,
        omega_c=omega_c,
        omega_th=omega_th,
        mass=inputs.mass,
        hbar=inputs.hbar,
    )


@dataclass(frozen=True)
class Ohmic:
    """Memoryless friction, K(t) = 2 gamma delta(t)."""

    gamma: float

    def __post_init__(self):
        _finite(gamma=self.gamma)
        _require(self.gamma > 0, "Ohmic kernel needs gamma > 0")

    def scales(self):
        return ()

    def describe(self):
        return "ohmic"


@dataclass(frozen=True)
class SingleRelaxation:
    """Exponential memory, K(t) = (gamma / tau) exp(-t / tau) theta(t)."""

    gamma: float
    tau: float

    def __post_init__(self):
        _finite(gamma=self.gamma, tau=self.tau)
        _require(self.gamma > 0, "SingleRelaxation kernel needs gamma > 0")
        _require(self.tau > 0, "SingleRelaxation kernel needs tau > 0")

    def scales(self):
        return (1.0 / self.tau, math.sqrt(self.gamma / self.tau))

    def describe(self):
        return f"srt(tau={self.tau!r})"


KernelModel = Union[Ohmic, SingleRelaxation]


def kernel_fourier(model: KernelModel, omega: float) -> complex:
    """K(omega) = integral of K(t) exp(i omega t) dt.

    Ohmic gives the constant ``gamma``; the single-relaxation kernel gives
    ``gamma / (1 - i omega tau)``.
    """
    if isinstance(model, Ohmic):
        return complex(model.gamma, 0.0)
    if isinstance(model, SingleRelaxation):
        wt = omega * model.tau
        d = 1.0 + wt * wt
        return complex(model.gamma / d, model.gamma * wt / d)
    raise TypeError(f"unknown kernel model {model!r}")
