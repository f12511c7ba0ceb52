"""Self-checks behind the ``verify`` command: the adjoint dot test, the
analytic sphere-area identity, a brute-force oracle comparison, and the
gradient-consistency check (including a deliberately mismatched adjoint
to prove the check has teeth)."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import (ApertureGeometry, Image3D, SamplingParams, SensorColumn,
                       Sinogram, VoxelGrid3D)
from .operator import (ApertureOperator, build_aperture_operator,
                       build_column_operator, forward_column)
from .oracle import Phantom, direct_srt, make_phantom
from .solver import gradient_check

DOT_TEST_TOL = 1e-12
SPHERE_AREA_TOL = 0.02
ORACLE_RMSE_TOL = 0.02
GRADIENT_TOL = 1e-6
PERTURBED_GRADIENT_FLOOR = 1e-3
RESOLVED_RADIUS_VOXELS = 4.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    comparison: str  # "<=" or ">="

    @property
    def passed(self) -> bool:
        if self.comparison == "<=":
            return self.measured <= self.threshold
        return self.measured >= self.threshold


def adjoint_dot_test(op: ApertureOperator, rng, trials: int = 5) -> float:
    """Worst |<Ax, y> - <x, A'y>| / (||Ax|| * ||y||) over random pairs."""
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(op.grid.n_voxels)
        y = rng.standard_normal(op.geometry.n_measurements)
        ax = op.forward(Image3D(op.grid, x)).values
        aty = op.adjoint(Sinogram(op.geometry, y)).values
        denom = float(np.linalg.norm(ax) * np.linalg.norm(y))
        if denom == 0.0:
            continue
        worst = max(worst, abs(float(ax @ y) - float(x @ aty)) / denom)
    return worst


def sphere_area_error(grid: VoxelGrid3D, sampling: SamplingParams) -> float:
    """Max relative error of the shell integrals of f = 1 against
    4*pi*r^2, for shells of at least RESOLVED_RADIUS_VOXELS that fit
    inside the grid.  Uses an interior column derived from the grid."""
    h = grid.spacing
    margin = 2.0 * h
    half_xy = 0.5 * (grid.m_s - 1) * h
    cx = grid.origin[0] + half_xy
    cz = grid.origin[2] + 0.5 * (grid.m_z - 1) * h
    radius_max = min(half_xy, 0.5 * (grid.m_z - 1) * h) - margin
    if radius_max < RESOLVED_RADIUS_VOXELS * h:
        raise ValidationError("grid too small for the sphere-area check; "
                              "need at least ~14 voxels per axis")
    dl = 0.5 * h
    radii = dl * np.arange(1, int(radius_max / dl) + 1)
    column = SensorColumn((cx, cx), (cz,))
    op = build_column_operator(grid, column, radii, sampling)
    ones = Image3D(grid, np.ones(grid.n_voxels))
    out = forward_column(op, ones)[0]
    exact = 4.0 * math.pi * radii ** 2
    resolved = radii >= RESOLVED_RADIUS_VOXELS * h
    return float((np.abs(out[resolved] - exact[resolved]) / exact[resolved]).max())


def oracle_rmse(op: ApertureOperator, oracle_nodes: int = 192) -> float:
    """Relative RMSE of column 0 of the factorized forward against the
    dense shell quadrature, on a centered Gaussian phantom, over resolved
    radii."""
    grid, geo = op.grid, op.geometry
    h = grid.spacing
    center = (grid.origin[0] + 0.5 * (grid.m_s - 1) * h,
              grid.origin[1] + 0.5 * (grid.m_s - 1) * h,
              grid.origin[2] + 0.5 * (grid.m_z - 1) * h)
    width = max(2.0 * h, grid.m_s * h / 6.0)
    image = make_phantom(Phantom("gaussian", center, width), grid)
    column = geo.columns[0]
    fast = forward_column(op.column_operator(0), image)
    radii = np.asarray(geo.radii)
    resolved = radii >= RESOLVED_RADIUS_VOXELS * h
    reference = np.zeros_like(fast)
    for hi, z in enumerate(column.heights):
        for li in np.flatnonzero(resolved):
            sensor = (column.center_xy[0], column.center_xy[1], z)
            reference[hi, li] = direct_srt(image, sensor, radii[li],
                                           oracle_nodes, oracle_nodes)
    ref_power = float((reference[:, resolved] ** 2).mean())
    if ref_power == 0.0:
        return 0.0
    diff = fast[:, resolved] - reference[:, resolved]
    return math.sqrt(float((diff ** 2).mean()) / ref_power)


class ScaledAdjointOperator:
    """Wrapper whose adjoint is scaled by a constant: an intentionally
    unmatched pair used to demonstrate that the gradient check detects
    inconsistency."""

    def __init__(self, op: ApertureOperator, scale: float):
        self._op = op
        self._scale = scale
        self.grid = op.grid
        self.geometry = op.geometry

    def forward(self, image: Image3D) -> Sinogram:
        return self._op.forward(image)

    def adjoint(self, sinogram: Sinogram) -> Image3D:
        image = self._op.adjoint(sinogram)
        return Image3D(image.grid, self._scale * image.values)


def run_verification(grid: VoxelGrid3D, geometry: ApertureGeometry,
                     sampling: SamplingParams, seed: int = 0,
                     threads: int = 1) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    op = build_aperture_operator(grid, geometry, sampling, threads)

    results = [
        CheckResult("adjoint dot test", adjoint_dot_test(op, rng), DOT_TEST_TOL, "<="),
        CheckResult("sphere area (f=1)", sphere_area_error(grid, sampling),
                    SPHERE_AREA_TOL, "<="),
        CheckResult("oracle comparison (gaussian)", oracle_rmse(op),
                    ORACLE_RMSE_TOL, "<="),
    ]

    f0 = Image3D(grid, rng.standard_normal(grid.n_voxels))
    y0 = Sinogram(geometry, rng.standard_normal(geometry.n_measurements))
    results.append(CheckResult("gradient check (matched)",
                               gradient_check(op, f0, y0, 3, rng),
                               GRADIENT_TOL, "<="))
    perturbed = ScaledAdjointOperator(op, 1.01)
    results.append(CheckResult("gradient check (1% perturbed adjoint)",
                               gradient_check(perturbed, f0, y0, 3, rng),
                               PERTURBED_GRADIENT_FLOOR, ">="))
    return results
