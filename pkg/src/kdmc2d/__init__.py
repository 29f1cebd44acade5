"""2D Monte Carlo neutral-particle transport under a BGK collision model:
fully-resolved kinetic simulation and the asymptotic-preserving
kinetic-diffusion (KDMC) scheme, plus the convergence/runtime experiment
harness."""

from .core import (Background, Domain, Maxwellian, Particle, RngStream, Vec2,
                   derive_stream, lookup)
from .sampling import (DiffusiveMoments, SourceSpec, diffusive_moments,
                       sample_diffusive_increment, sample_exponential,
                       sample_maxwellian, sample_source,
                       temperature_from_mean_speed)
from .transport import (StepConfig, TrajectoryOutcome, kinetic_flight,
                        midpoint_fields, simulate_kdmc, simulate_kinetic)
from .tally import (Histogram2D, Profile1D, deposit, fold_about_center,
                    folded_profile, l2_diff, normalize, pointwise_diff,
                    reduce_x_average)
from .harness import (RunConfig, SweepRow, estimate_order, run_simulation,
                      sweep_diffusive_limit, sweep_kinetic_limit)

__version__ = "0.1.0"

__all__ = [
    "Background", "Domain", "Maxwellian", "Particle", "RngStream", "Vec2",
    "derive_stream", "lookup",
    "DiffusiveMoments", "SourceSpec", "diffusive_moments",
    "sample_diffusive_increment", "sample_exponential", "sample_maxwellian",
    "sample_source", "temperature_from_mean_speed",
    "StepConfig", "TrajectoryOutcome", "kinetic_flight", "midpoint_fields",
    "simulate_kdmc", "simulate_kinetic",
    "Histogram2D", "Profile1D", "deposit", "fold_about_center",
    "folded_profile", "l2_diff", "normalize", "pointwise_diff",
    "reduce_x_average",
    "RunConfig", "SweepRow", "estimate_order", "run_simulation",
    "sweep_diffusive_limit", "sweep_kinetic_limit",
]
