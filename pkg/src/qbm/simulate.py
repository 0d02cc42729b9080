"""Classical ensemble simulation of the Ohmic, white-noise limit.

The planar velocity obeys dv = (-gamma v + omega_c J v) dt + noise with
J (vx, vy) = (vy, -vx). Writing u = vx + i vy this is a complex
Ornstein-Uhlenbeck process, u' = exp(-(gamma + i omega_c) dt) u + noise, whose
one-step transition is sampled exactly. Positions follow by the trapezoidal
rule.

Each particle owns a random stream spawned from the run seed, so results do
not depend on how particles are grouped into blocks.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.signal import lfilter

from qbm.errors import ConfigError
from qbm.model import ReducedParams

DT_STABILITY = 0.05
# bytes of complex noise held in memory per block of particles
_BLOCK_BYTES = 64 * 2 ** 20


@dataclass(frozen=True)
class SimConfig:
    """Ensemble run parameters.

    ``record_every`` thins the stored MSD to every k-th step, unless
    ``record_steps`` lists the step indices explicitly;
    ``initial_velocity`` replaces the Maxwell draw with a fixed vector.
    """

    dt: float
    n_steps: int
    n_particles: int
    seed: int
    params: ReducedParams
    record_every: int = 1
    initial_velocity: Optional[Tuple[float, float]] = None
    record_steps: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        p = self.params
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        limit = DT_STABILITY / max(p.gamma, p.omega_c)
        if self.dt > limit * (1 + 1e-12):
            raise ConfigError(f"dt={self.dt} exceeds {DT_STABILITY}/max(gamma, omega_c) = {limit}")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.n_particles < 1:
            raise ConfigError("n_particles must be >= 1")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.record_steps is not None:
            steps = np.asarray(self.record_steps)
            if steps.size == 0 or np.any(np.diff(steps) <= 0) or steps[0] < 0 or steps[-1] > self.n_steps:
                raise ConfigError("record_steps must be ascending step indices within [0, n_steps]")

    def recorded_steps(self):
        if self.record_steps is not None:
            return np.asarray(self.record_steps, dtype=np.int64)
        return np.arange(0, self.n_steps + 1, self.record_every)


@dataclass(frozen=True)
class EnsembleStats:
    times: np.ndarray
    msd_mean: np.ndarray
    msd_stderr: np.ndarray


def _propagator(params, dt):
    return np.exp(complex(-params.gamma * dt, -params.omega_c * dt))


def _noise_scale(params, dt):
    """Per-component standard deviation of the exact one-step increment."""
    kT_over_m = params.kT / params.mass
    return math.sqrt(kT_over_m * -math.expm1(-2.0 * params.gamma * dt))


def step_velocity(v, params: ReducedParams, dt, noise):
    """Advance a planar velocity by one exact step.

    Parameters
    ----------
    v : array_like, shape (..., 2)
        Current velocity (or a stack of velocities).
    noise : array_like, shape (..., 2)
        Standard normal draws; scaled internally so the increment has
        covariance (k_B T / m)(1 - exp(-2 gamma dt)) I.
    """
    v = np.asarray(v, dtype=float)
    noise = np.asarray(noise, dtype=float)
    decay = math.exp(-params.gamma * dt)
    c, s = math.cos(params.omega_c * dt), math.sin(params.omega_c * dt)
    vx, vy = v[..., 0], v[..., 1]
    rotated = decay * np.stack([c * vx + s * vy, c * vy - s * vx], axis=-1)
    return rotated + _noise_scale(params, dt) * noise


def _particle_streams(seed, n):
    return [np.random.Generator(np.random.PCG64(child)) for child in np.random.SeedSequence(seed).spawn(n)]


def integrate_paths(drive, params: ReducedParams, dt):
    """Complex displacements x + i y for rows of velocity drives.

    ``drive[:, 0]`` is the initial velocity u0 = vx + i vy and
    ``drive[:, k]`` the (already scaled) noise increment of step k, so that
    u_k = exp(-(gamma + i omega_c) dt) u_{k-1} + drive[:, k]. Returns the
    displacement at steps 0..n (trapezoidal positions).
    """
    drive = np.atleast_2d(drive)
    u = lfilter([1.0], [1.0, -_propagator(params, dt)], drive, axis=1)
    steps = 0.5 * dt * (u[:, :-1] + u[:, 1:])
    return np.concatenate([np.zeros((drive.shape[0], 1), dtype=complex), np.cumsum(steps, axis=1)], axis=1)


def _run_block(rngs, config, record_idx):
    p = config.params
    n_steps = config.n_steps
    sigma = _noise_scale(p, config.dt)
    v_thermal = math.sqrt(p.kT / p.mass)
    drive = np.empty((len(rngs), n_steps + 1), dtype=complex)
    for row, rng in enumerate(rngs):
        if config.initial_velocity is None:
            v0 = rng.standard_normal(2) * v_thermal
        else:
            v0 = np.asarray(config.initial_velocity, dtype=float)
        drive[row, 0] = complex(v0[0], v0[1])
        if sigma > 0:
            xi = rng.standard_normal((n_steps, 2))
            drive[row, 1:] = sigma * (xi[:, 0] + 1j * xi[:, 1])
        else:
            drive[row, 1:] = 0.0
    sel = integrate_paths(drive, p, config.dt)[:, record_idx]
    return sel.real ** 2 + sel.imag ** 2


def run_ensemble(config: SimConfig) -> EnsembleStats:
    """Simulate ``n_particles`` independent trajectories and return MSD statistics.

    Velocities start from the Maxwell distribution at k_B T = hbar omega_th / 2
    unless ``initial_velocity`` is given. The standard error is the sample
    standard deviation over particles divided by sqrt(n_particles).
    """
    record_idx = config.recorded_steps()
    rngs = _particle_streams(config.seed, config.n_particles)
    per_particle = np.empty((config.n_particles, record_idx.size))
    block = max(1, _BLOCK_BYTES // (16 * (config.n_steps + 1)))
    for start in range(0, config.n_particles, block):
        stop = min(start + block, config.n_particles)
        per_particle[start:stop] = _run_block(rngs[start:stop], config, record_idx)
    mean = per_particle.mean(axis=0)
    if config.n_particles > 1:
        stderr = per_particle.std(axis=0, ddof=1) / math.sqrt(config.n_particles)
    else:
        stderr = np.zeros_like(mean)
    return EnsembleStats(times=record_idx * config.dt, msd_mean=mean, msd_stderr=stderr)


def default_config(params: ReducedParams, t_end=20.0, n_particles=10_000, seed=20240607, n_record=200, dt=None):
    """Build a config with dt = 0.01 / max(gamma, omega_c) covering [0, t_end]."""
    dt = dt or 0.01 / max(params.gamma, params.omega_c)
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    record_every = max(1, n_steps // n_record)
    return SimConfig(dt=dt, n_steps=n_steps, n_particles=n_particles, seed=seed, params=params, record_every=record_every)
