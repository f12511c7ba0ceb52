"""Scaling benchmark: forward wall-time and matrix size across grid sizes.

Protocol: cubic grids (m_z = m_s) with unit spacing, one sensor column
just outside the volume, radii spanning twice the grid width, and both
the radius and height counts following the standard sampling rule
n = round(M**(1/3)) where M is the voxel count.  A power law t ~ M**e is
fitted to the timings on log-log axes.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import Image3D, SamplingParams, SensorColumn, VoxelGrid3D
from .operator import build_column_operator, forward_column


@dataclass(frozen=True)
class BenchPoint:
    m_s: int
    m_z: int
    n_radii: int
    n_heights: int
    n_voxels: int
    nnz_xy: int
    nnz_zl: int
    build_seconds: float
    forward_seconds: float

    @property
    def nnz_total(self) -> int:
        return self.nnz_xy + self.nnz_zl


def bench_case(m_s: int, sampling: SamplingParams = SamplingParams(),
               seed: int = 0, repeats: int = 3) -> BenchPoint:
    """Build the scaling-protocol operator for one grid size and time
    the forward application (best of ``repeats``)."""
    if m_s < 4:
        raise ValidationError(f"bench grid size must be >= 4, got {m_s}")
    m_z = m_s
    grid = VoxelGrid3D.centered(m_s, m_z, 1.0)
    n_voxels = grid.n_voxels
    n = max(4, round(n_voxels ** (1.0 / 3.0)))
    radius_max = 2.0 * m_s
    radii = np.linspace(radius_max / n, radius_max, n)
    heights = tuple((np.arange(n) - (n - 1) / 2.0) * (m_z / n))
    column = SensorColumn((0.75 * m_s, 0.0), heights)

    t0 = time.perf_counter()
    op = build_column_operator(grid, column, radii, sampling)
    build_seconds = time.perf_counter() - t0

    rng = np.random.default_rng(seed)
    image = Image3D(grid, rng.standard_normal(n_voxels))
    t0 = time.perf_counter()
    forward_column(op, image)  # warm-up, also calibrates the inner loop
    once = time.perf_counter() - t0
    # amortize fast cases over an inner loop so timer noise stays small
    inner = max(1, int(math.ceil(0.005 / max(once, 1e-9))))
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            forward_column(op, image)
        best = min(best, (time.perf_counter() - t0) / inner)

    return BenchPoint(m_s, m_z, n, n, n_voxels, op.a12.nnz, op.a34.nnz,
                      build_seconds, best)


def run_bench(sizes, sampling: SamplingParams = SamplingParams(),
              seed: int = 0, repeats: int = 3) -> list[BenchPoint]:
    return [bench_case(m_s, sampling, seed, repeats) for m_s in sizes]


def fit_exponent(x, y) -> float:
    """Slope of log(y) against log(x)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2:
        raise ValidationError("power-law fit needs at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("power-law fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def time_exponent(points) -> float:
    return fit_exponent([p.n_voxels for p in points],
                        [p.forward_seconds for p in points])


def nnz_exponent(points) -> float:
    return fit_exponent([p.n_voxels for p in points],
                        [p.nnz_total for p in points])
