"""Trajectory integrators: the fully-resolved kinetic walk and the
kinetic-diffusion (KDMC) walk, with absorbing boundaries and end-time
truncation.

Per KDMC step the clock advances by tau + theta = ceil(tau / dt) * dt: the
exponential kinetic flight tau followed by a diffusive flight of duration
theta = dt - (tau mod dt) that fills the step up to the next dt grid point.
The kinetic sub-step uses exact segment clipping at the boundary; the
diffusive sub-step absorbs iff its endpoint lies outside the domain
(endpoint-only, knowingly biased).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .core import Background, Domain, Maxwellian, Particle, RngStream, Vec2
from .sampling import diffusive_moments

SURVIVED = "survived"
ABSORBED = "absorbed"


@dataclass(frozen=True)
class StepConfig:
    dt: float        # KDMC time step; ignored by the kinetic integrator
    t_end: float

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not (self.t_end > 0.0):
            raise ValueError(f"t_end must be > 0, got {self.t_end}")


@dataclass
class TrajectoryOutcome:
    final_position: Vec2
    status: str                    # SURVIVED or ABSORBED
    collision_count: int
    step_count: int

    @property
    def absorbed(self) -> bool:
        return self.status == ABSORBED


def kinetic_flight(p: Particle, v, dtau: float, domain: Domain):
    """Straight flight for dtau; returns (endpoint, absorbed,
    absorption_point) with the absorption point the exact first boundary
    crossing of the segment."""
    if dtau < 0.0:
        raise ValueError(f"dtau must be >= 0, got {dtau}")
    vx, vy = v
    ex, ey, absorbed = k.flight(p.position.x, p.position.y, vx, vy, dtau,
                                domain.lx, domain.ly)
    point = Vec2(ex, ey)
    if absorbed:
        return point, True, point
    return point, False, None


def diffusive_flight_time(tau: float, dt: float) -> float:
    """theta = dt - (tau mod dt), the remainder filling the dt grid."""
    return dt - math.fmod(tau, dt)


def midpoint_fields(bg: Background, x_prev, x_kin, v_next,
                    theta: float) -> tuple[float, Maxwellian]:
    """Background fields for a diffusive sub-step on a heterogeneous grid:
    estimate the endpoint from the mean displacement with fields frozen at
    the step start, then look up at the midpoint of the diffusive leg."""
    if theta < 0.0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if bg.is_homogeneous or theta == 0.0:
        return bg.lookup(x_kin)
    rate0, m0 = bg.lookup(x_prev)
    if rate0 > 0.0:
        mu = diffusive_moments(v_next, m0, rate0, theta).mu
    else:
        vx, vy = v_next
        mu = Vec2(vx * theta, vy * theta)
    xk, yk = x_kin
    return bg.lookup(Vec2(xk + 0.5 * mu.x, yk + 0.5 * mu.y))


def _require_start(p: Particle, domain: Domain):
    if p.time != 0.0:
        raise ValueError("trajectories must start at time 0")
    if not domain.contains(p.position):
        raise ValueError(
            f"particle must start strictly inside the domain, got "
            f"{tuple(p.position)}")


def simulate_kinetic(p: Particle, bg: Background, domain: Domain,
                     cfg: StepConfig, rng: RngStream) -> TrajectoryOutcome:
    _require_start(p, domain)
    s, fx, fy, absorbed, ncoll, nsteps = k.sim_kinetic_one(
        np.uint64(rng.state), p.position.x, p.position.y,
        p.velocity.x, p.velocity.y,
        bg.rates, bg.temps, bg.drift_x, bg.drift_y,
        domain.lx, domain.ly, cfg.t_end)
    rng.state = int(s)
    return TrajectoryOutcome(Vec2(fx, fy),
                             ABSORBED if absorbed else SURVIVED,
                             ncoll, nsteps)


def simulate_kdmc(p: Particle, bg: Background, domain: Domain,
                  cfg: StepConfig, rng: RngStream) -> TrajectoryOutcome:
    _require_start(p, domain)
    s, fx, fy, absorbed, ncoll, nsteps = k.sim_kdmc_one(
        np.uint64(rng.state), p.position.x, p.position.y,
        p.velocity.x, p.velocity.y,
        bg.rates, bg.temps, bg.drift_x, bg.drift_y,
        domain.lx, domain.ly, cfg.dt, cfg.t_end)
    rng.state = int(s)
    return TrajectoryOutcome(Vec2(fx, fy),
                             ABSORBED if absorbed else SURVIVED,
                             ncoll, nsteps)
