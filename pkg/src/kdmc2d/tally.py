"""Final-position histograms and the reduction pipeline: x-averaging,
folding about the center and comparison norms.

Unit-weight tallies accumulate integer counts so that parallel merges are
exact and order-independent; normalization to probability mass per cell
happens only at output time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Domain
from .transport import TrajectoryOutcome

FLOAT_FMT = "%.17g"


@dataclass
class Histogram2D:
    nx: int
    ny: int
    extent: Domain
    mass: np.ndarray = None            # (nx, ny), weight per cell
    absorbed_mass: float = 0.0
    total_mass: float = 0.0

    def __post_init__(self):
        if self.mass is None:
            self.mass = np.zeros((self.nx, self.ny))
        else:
            self.mass = np.asarray(self.mass, dtype=np.float64)
            if self.mass.shape != (self.nx, self.ny):
                raise ValueError(
                    f"mass shape {self.mass.shape} != ({self.nx}, {self.ny})")

    @classmethod
    def from_counts(cls, counts: np.ndarray, absorbed: int,
                    extent: Domain) -> "Histogram2D":
        counts = np.asarray(counts)
        nx, ny = counts.shape
        total = float(counts.sum()) + float(absorbed)
        return cls(nx=nx, ny=ny, extent=extent,
                   mass=counts.astype(np.float64),
                   absorbed_mass=float(absorbed), total_mass=total)

    @property
    def absorbed_fraction(self) -> float:
        if self.total_mass > 0.0:
            return self.absorbed_mass / self.total_mass
        # difference histograms have zero total mass; their absorbed field is
        # already a fraction difference
        return self.absorbed_mass

    def cell_of(self, position) -> tuple[int, int]:
        x, y = position
        i = min(int(np.floor(self.nx * x / self.extent.lx)), self.nx - 1)
        j = min(int(np.floor(self.ny * y / self.extent.ly)), self.ny - 1)
        return max(i, 0), max(j, 0)


@dataclass
class Profile1D:
    values: np.ndarray
    coordinates: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.coordinates = np.asarray(self.coordinates, dtype=np.float64)

    @property
    def n(self) -> int:
        return self.values.size


def deposit(h: Histogram2D, outcome: TrajectoryOutcome, weight: float = 1.0):
    if weight <= 0.0:
        raise ValueError(f"deposit weight must be > 0, got {weight}")
    if outcome.absorbed:
        h.absorbed_mass += weight
    else:
        i, j = h.cell_of(outcome.final_position)
        h.mass[i, j] += weight
    h.total_mass += weight


def normalize(h: Histogram2D) -> Histogram2D:
    if h.total_mass <= 0.0:
        raise ValueError("cannot normalize an empty tally")
    return Histogram2D(nx=h.nx, ny=h.ny, extent=h.extent,
                       mass=h.mass / h.total_mass,
                       absorbed_mass=h.absorbed_mass / h.total_mass,
                       total_mass=1.0)


def merge(a: Histogram2D, b: Histogram2D) -> Histogram2D:
    if (a.nx, a.ny) != (b.nx, b.ny):
        raise ValueError("histogram shapes differ")
    return Histogram2D(nx=a.nx, ny=a.ny, extent=a.extent,
                       mass=a.mass + b.mass,
                       absorbed_mass=a.absorbed_mass + b.absorbed_mass,
                       total_mass=a.total_mass + b.total_mass)


def reduce_x_average(h: Histogram2D) -> Profile1D:
    values = h.mass.mean(axis=0)
    coords = (np.arange(h.ny) + 0.5) * h.extent.ly / h.ny
    return Profile1D(values=values, coordinates=coords)


def fold_about_center(p: Profile1D) -> Profile1D:
    """Mirror and average a centered profile about its midpoint; coordinate i
    becomes the distance (i + 0.5)/n from the center."""
    n = p.n
    if n % 2 != 0:
        raise ValueError(f"folding requires an even-length profile, got {n}")
    half = n // 2
    lower = p.values[:half][::-1]
    upper = p.values[half:]
    spacing = p.coordinates[1] - p.coordinates[0] if n > 1 else 1.0
    coords = (np.arange(half) + 0.5) * spacing
    return Profile1D(values=0.5 * (lower + upper), coordinates=coords)


def l2_diff(a: Profile1D, b: Profile1D) -> float:
    if a.n != b.n:
        raise ValueError(f"profile lengths differ: {a.n} vs {b.n}")
    return float(np.sqrt(np.sum((a.values - b.values) ** 2)))


def pointwise_diff(a, b):
    """Elementwise a - b; by convention a is the kinetic result and b the
    KDMC result."""
    if isinstance(a, Histogram2D) and isinstance(b, Histogram2D):
        if (a.nx, a.ny) != (b.nx, b.ny):
            raise ValueError("histogram shapes differ")
        return Histogram2D(nx=a.nx, ny=a.ny, extent=a.extent,
                           mass=a.mass - b.mass,
                           absorbed_mass=a.absorbed_mass - b.absorbed_mass,
                           total_mass=a.total_mass - b.total_mass)
    if isinstance(a, Profile1D) and isinstance(b, Profile1D):
        if a.n != b.n:
            raise ValueError(f"profile lengths differ: {a.n} vs {b.n}")
        return Profile1D(values=a.values - b.values,
                         coordinates=a.coordinates.copy())
    raise TypeError("pointwise_diff expects two histograms or two profiles")


def folded_profile(h: Histogram2D) -> Profile1D:
    """The standard reduction: x-average then fold about the center."""
    return fold_about_center(reduce_x_average(h))


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def write_histogram(path, h: Histogram2D):
    """Header "nx,ny,absorbed_fraction", then ny rows of nx comma-separated
    values; row j on line j+2, cell order i = 0..nx-1."""
    with open(path, "w") as f:
        f.write(f"{h.nx},{h.ny},{FLOAT_FMT % h.absorbed_fraction}\n")
        for j in range(h.ny):
            f.write(",".join(FLOAT_FMT % h.mass[i, j]
                             for i in range(h.nx)) + "\n")


def read_histogram(path) -> Histogram2D:
    with open(path) as f:
        header = f.readline().strip().split(",")
        nx, ny = int(header[0]), int(header[1])
        absorbed = float(header[2])
        mass = np.zeros((nx, ny))
        for j in range(ny):
            row = f.readline().strip().split(",")
            if len(row) != nx:
                raise ValueError(f"{path}: row {j} has {len(row)} values, "
                                 f"expected {nx}")
            mass[:, j] = [float(v) for v in row]
    body = float(mass.sum())
    return Histogram2D(nx=nx, ny=ny, extent=Domain(), mass=mass,
                       absorbed_mass=absorbed, total_mass=body + absorbed)


def write_profile(path, p: Profile1D):
    with open(path, "w") as f:
        f.write("x,value\n")
        for x, v in zip(p.coordinates, p.values):
            f.write(f"{FLOAT_FMT % x},{FLOAT_FMT % v}\n")
