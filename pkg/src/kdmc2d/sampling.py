"""Stochastic kernels: exponential flight times, Maxwellian velocities,
source emission and the factored diffusive increment.

The diffusive increment has mean
    mu = u*theta + w * (1 - exp(-x)),          x = theta * R,  w = (v - u)/R
and covariance
    Sigma = a*I + b * w (x) w
with a = (2T/R^2) * (2 e^{-x} + x(1 + e^{-x}) - 2) and
b = 1 - 2 x e^{-x} - e^{-2x}. These are the exact conditional moments of the
integrated velocity-jump process over a window theta whose initial velocity v
is known: a grows like (2T/R)*theta for large x, the classical diffusion
limit. Both brackets are >= 0 analytically, so the
factored form is positive semidefinite by construction and sampling needs no
matrix square root. For x < 1e-3 the brackets are evaluated by their leading
series (x^3/6 - x^4/12 and x^3/3 - x^4/3) to avoid catastrophic cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .core import Domain, Maxwellian, Particle, RngStream, Vec2


@dataclass(frozen=True)
class DiffusiveMoments:
    """Factored normal law of one diffusive increment."""

    mu: Vec2
    a: float     # isotropic covariance coefficient, m^2
    b: float     # rank-one coefficient, dimensionless
    w: Vec2      # (v_next - u) / rate, m

    def covariance(self) -> np.ndarray:
        w = np.array(self.w)
        return self.a * np.eye(2) + self.b * np.outer(w, w)


@dataclass(frozen=True)
class SourceSpec:
    position: Vec2
    emission: Maxwellian

    def __post_init__(self):
        object.__setattr__(self, "position", Vec2(*self.position))

    def validate(self, domain: Domain):
        if not domain.contains(self.position):
            raise ValueError(
                f"source position {tuple(self.position)} must lie strictly "
                f"inside the domain ({domain.lx} x {domain.ly})")


def exponential_from_uniform(u: float, rate: float) -> float:
    """Inverse-CDF map; u must lie in (0, 1]."""
    if rate < 0.0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    if rate == 0.0:
        return math.inf
    return -math.log(u) / rate


def sample_exponential(rng: RngStream, rate: float) -> float:
    """Flight time ~ Exp(rate); +inf for rate == 0 (ballistic flight)."""
    if rate < 0.0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    u = rng.uniform()
    if rate == 0.0:
        return math.inf
    return -math.log(u) / rate


def sample_maxwellian(rng: RngStream, m: Maxwellian) -> Vec2:
    st = math.sqrt(m.temperature)
    z1, z2 = rng.normal_pair()
    return Vec2(m.drift.x + st * z1, m.drift.y + st * z2)


def temperature_from_mean_speed(s: float) -> float:
    """Invert mean speed = sqrt(pi*T/2) of a zero-drift 2D Maxwellian."""
    if s < 0.0:
        raise ValueError(f"mean speed must be >= 0, got {s}")
    return (2.0 / math.pi) * s * s


def mean_speed_from_temperature(t: float) -> float:
    return math.sqrt(0.5 * math.pi * t)


def sample_source(rng: RngStream, src: SourceSpec) -> Particle:
    v = sample_maxwellian(rng, src.emission)
    return Particle(position=src.position, velocity=v, time=0.0, weight=1.0,
                    alive=True)


def diffusive_moments(v_next, m: Maxwellian, rate: float,
                      theta: float) -> DiffusiveMoments:
    if rate <= 0.0:
        raise ValueError(
            f"diffusive moments require rate > 0, got {rate}; zero-rate "
            f"flights are ballistic and belong to the transport layer")
    if theta < 0.0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    vx, vy = v_next
    mux, muy, a, b, wx, wy = k.moments(
        vx, vy, m.temperature, m.drift.x, m.drift.y, rate, theta)
    return DiffusiveMoments(mu=Vec2(mux, muy), a=a, b=b, w=Vec2(wx, wy))


def sample_diffusive_increment(rng: RngStream,
                               dm: DiffusiveMoments) -> Vec2:
    s, dx, dy = k.sample_increment(
        np.uint64(rng.state), dm.mu.x, dm.mu.y, dm.a, dm.b, dm.w.x, dm.w.y)
    rng.state = int(s)
    return Vec2(dx, dy)
