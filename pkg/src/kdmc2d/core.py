"""Domain types shared across the simulator: particles, backgrounds,
the rectangular domain and reproducible per-particle RNG streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as k


class Vec2(NamedTuple):
    x: float
    y: float


def _check_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")


@dataclass
class Particle:
    position: Vec2
    velocity: Vec2
    time: float = 0.0
    weight: float = 1.0
    alive: bool = True

    def __post_init__(self):
        self.position = Vec2(*self.position)
        self.velocity = Vec2(*self.velocity)
        _check_finite("position", *self.position)
        _check_finite("velocity", *self.velocity)
        if self.weight <= 0.0:
            raise ValueError(f"particle weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class Maxwellian:
    """Isotropic 2D Maxwellian: per-component variance `temperature` (m^2/s^2)
    and drift velocity. Zero-drift samples have mean speed sqrt(pi*T/2)."""

    temperature: float
    drift: Vec2 = Vec2(0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "drift", Vec2(*self.drift))
        if self.temperature < 0.0:
            raise ValueError(
                f"temperature must be >= 0, got {self.temperature}")
        _check_finite("drift", *self.drift)


@dataclass(frozen=True)
class Domain:
    """Rectangle [0, lx] x [0, ly] with absorbing (ionizing) boundaries."""

    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if not (self.lx > 0.0 and self.ly > 0.0):
            raise ValueError(f"domain extents must be > 0, got "
                             f"({self.lx}, {self.ly})")

    def contains(self, pos) -> bool:
        x, y = pos
        return 0.0 < x < self.lx and 0.0 < y < self.ly


class Background:
    """Spatial field position -> (collision rate 1/s, Maxwellian).

    Internally always a piecewise-constant rectilinear grid; the homogeneous
    variant is a 1x1 grid. The flat arrays are what the hot kernels consume.
    """

    def __init__(self, domain: Domain, rates, temps, drift_x=0.0, drift_y=0.0):
        self.domain = domain
        rates = np.ascontiguousarray(rates, dtype=np.float64)
        if rates.ndim != 2:
            raise ValueError("rates must be a 2D array")
        if np.any(rates < 0.0):
            raise ValueError("collision rates must be >= 0")
        shape = rates.shape
        self.rates = rates
        self.temps = np.ascontiguousarray(
            np.broadcast_to(temps, shape), dtype=np.float64)
        if np.any(self.temps < 0.0):
            raise ValueError("temperatures must be >= 0")
        self.drift_x = np.ascontiguousarray(
            np.broadcast_to(drift_x, shape), dtype=np.float64)
        self.drift_y = np.ascontiguousarray(
            np.broadcast_to(drift_y, shape), dtype=np.float64)

    @classmethod
    def homogeneous(cls, rate: float, maxwellian: Maxwellian,
                    domain: Domain = Domain()) -> "Background":
        return cls(domain, [[rate]], maxwellian.temperature,
                   maxwellian.drift.x, maxwellian.drift.y)

    @property
    def is_homogeneous(self) -> bool:
        return self.rates.shape == (1, 1)

    def cell(self, position) -> tuple[int, int]:
        x, y = position
        _check_finite("lookup position", x, y)
        nxb, nyb = self.rates.shape
        return k.bg_cell(nxb, nyb, self.domain.lx, self.domain.ly, x, y)

    def lookup(self, position) -> tuple[float, Maxwellian]:
        i, j = self.cell(position)
        m = Maxwellian(self.temps[i, j],
                       Vec2(self.drift_x[i, j], self.drift_y[i, j]))
        return float(self.rates[i, j]), m


class RngStream:
    """Deterministic per-particle stream over a splitmix64-style counter
    generator; O(1) derivation from (seed, particle_index)."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = int(state)

    def uniform(self) -> float:
        """Uniform deviate on (0, 1]."""
        s, u = k.next_uniform(np.uint64(self.state))
        self.state = int(s)
        return u

    def normal_pair(self) -> tuple[float, float]:
        s, z1, z2 = k.next_normal_pair(np.uint64(self.state))
        self.state = int(s)
        return z1, z2

    def normal(self) -> float:
        return self.normal_pair()[0]


_U64_MASK = 0xFFFFFFFFFFFFFFFF


def derive_stream(seed: int, particle_index: int) -> RngStream:
    return RngStream(int(k.stream_init(
        np.uint64(seed & _U64_MASK),
        np.uint64(particle_index & _U64_MASK))))


def lookup(background: Background, position) -> tuple[float, Maxwellian]:
    return background.lookup(position)
