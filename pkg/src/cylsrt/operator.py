"""The factorized spherical-shell transform and its matched adjoint.

Per sensor column, the forward map is two sparse products with metadata-only
reshapes in between:

1. apply the x-y circle matrix to every z-layer of the image, giving the
   intermediate array indexed (radial bin, z-layer);
2. apply the height-radius half-circle matrix to the flattened intermediate,
   giving one value per (height, radius).

The adjoint runs the exact transposes in reverse order, so the pair passes
the dot-product test to rounding accuracy by construction.  All columns of
an aperture share one height-radius matrix.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .crt import build_xy_crt, build_zl_crt
from .errors import DimensionError
from .geometry import (ApertureGeometry, Image3D, SamplingParams, SensorColumn,
                       Sinogram, VoxelGrid3D)
from .sparse import SparseOperator


@dataclass(frozen=True)
class ColumnOperator:
    """Matrix pair for one sensor column."""

    a12: SparseOperator
    a34: SparseOperator
    grid: VoxelGrid3D
    column: SensorColumn

    def __post_init__(self):
        g, col = self.grid, self.column
        n_l = self.a12.n_rows
        if self.a12.n_cols != g.m_s * g.m_s:
            raise DimensionError(f"xy matrix has {self.a12.n_cols} columns, "
                                 f"grid plane has {g.m_s * g.m_s} voxels")
        if self.a34.n_cols != n_l * g.m_z:
            raise DimensionError(f"zl matrix has {self.a34.n_cols} columns, "
                                 f"expected n_radii*m_z = {n_l * g.m_z}")
        if self.a34.n_rows != n_l * col.n_heights:
            raise DimensionError(f"zl matrix has {self.a34.n_rows} rows, "
                                 f"expected n_radii*n_heights = {n_l * col.n_heights}")

    @property
    def n_radii(self) -> int:
        return self.a12.n_rows

    @property
    def n_heights(self) -> int:
        return self.column.n_heights


def build_column_operator(grid: VoxelGrid3D, column: SensorColumn, radii,
                          sampling: SamplingParams = SamplingParams()) -> ColumnOperator:
    a12 = build_xy_crt(grid, column.center_xy, radii, sampling)
    a34 = build_zl_crt(grid.m_z, grid.spacing, grid.origin[2], radii,
                       column.heights, sampling)
    return ColumnOperator(a12, a34, grid, column)


def _check_grid(op_grid: VoxelGrid3D, image: Image3D):
    g = image.grid
    if g != op_grid:
        for name, got, want in (("m_s", g.m_s, op_grid.m_s),
                                ("m_z", g.m_z, op_grid.m_z),
                                ("spacing", g.spacing, op_grid.spacing),
                                ("origin", g.origin, op_grid.origin)):
            if got != want:
                raise DimensionError(f"image grid {name} is {got}, "
                                     f"operator grid has {want}")
        raise DimensionError("image grid does not match operator grid")


def forward_column(op: ColumnOperator, image: Image3D) -> np.ndarray:
    """Shell integrals for one column; shape (n_heights, n_radii)."""
    _check_grid(op.grid, image)
    g = op.grid
    planes = image.values.reshape(g.m_z, g.m_s * g.m_s)
    intermediate = op.a12.matmat(planes.T)          # (n_l, m_z)
    flat = np.ascontiguousarray(intermediate.T).ravel()  # l' + n_l*z
    out = op.a34.matvec(flat)                       # l + n_l*h
    return out.reshape(op.n_heights, op.n_radii)


def adjoint_column(op: ColumnOperator, block: np.ndarray) -> Image3D:
    """Exact transpose of :func:`forward_column` as a linear map."""
    g = op.grid
    block = np.asarray(block, dtype=np.float64)
    if block.size != op.n_heights * op.n_radii:
        raise DimensionError(f"sinogram block has {block.size} entries, "
                             f"operator expects n_heights*n_radii = "
                             f"{op.n_heights * op.n_radii}")
    flat = np.ascontiguousarray(block).ravel()      # l + n_l*h
    intermediate = op.a34.rmatvec(flat)             # l' + n_l*z
    planes = op.a12.rmatmat(intermediate.reshape(g.m_z, op.n_radii).T)  # (m_s^2, m_z)
    return Image3D(g, np.ascontiguousarray(planes.T).ravel())


@dataclass(frozen=True)
class ApertureOperator:
    """Per-column x-y matrices plus the one shared height-radius matrix.

    ``threads`` bounds the worker pool used to fan out per-column work;
    results do not depend on it (each column's block is computed
    independently and adjoint partials are summed in column order).
    """

    a12_list: tuple[SparseOperator, ...]
    a34: SparseOperator
    grid: VoxelGrid3D
    geometry: ApertureGeometry
    threads: int = 1

    def __post_init__(self):
        if len(self.a12_list) != self.geometry.n_columns:
            raise DimensionError(f"{len(self.a12_list)} xy matrices for "
                                 f"{self.geometry.n_columns} columns")
        for c in range(self.geometry.n_columns):
            self.column_operator(c)  # dimension checks

    def column_operator(self, c: int) -> ColumnOperator:
        return ColumnOperator(self.a12_list[c], self.a34, self.grid,
                              self.geometry.columns[c])

    def forward(self, image: Image3D) -> Sinogram:
        return forward_aperture(self, image)

    def adjoint(self, sinogram: Sinogram) -> Image3D:
        return adjoint_aperture(self, sinogram)


def build_aperture_operator(grid: VoxelGrid3D, geometry: ApertureGeometry,
                            sampling: SamplingParams = SamplingParams(),
                            threads: int = 1) -> ApertureOperator:
    """Build the shared height-radius matrix once and one x-y matrix per
    column (in parallel when ``threads`` > 1)."""
    a34 = build_zl_crt(grid.m_z, grid.spacing, grid.origin[2], geometry.radii,
                       geometry.heights, sampling)

    def one(col: SensorColumn) -> SparseOperator:
        return build_xy_crt(grid, col.center_xy, geometry.radii, sampling)

    if threads > 1 and geometry.n_columns > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            a12_list = tuple(pool.map(one, geometry.columns))
    else:
        a12_list = tuple(one(col) for col in geometry.columns)
    return ApertureOperator(a12_list, a34, grid, geometry, threads)


def _map_columns(op: ApertureOperator, fn, n: int):
    if op.threads > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=op.threads) as pool:
            return list(pool.map(fn, range(n)))
    return [fn(c) for c in range(n)]


def forward_aperture(op: ApertureOperator, image: Image3D) -> Sinogram:
    """Concatenation of per-column forward blocks in geometry order."""
    _check_grid(op.grid, image)
    geo = op.geometry
    out = np.empty((geo.n_columns, geo.n_heights, geo.n_radii))

    def one(c: int):
        out[c] = forward_column(op.column_operator(c), image)

    _map_columns(op, one, geo.n_columns)
    return Sinogram(geo, out.ravel())


def adjoint_aperture(op: ApertureOperator, sinogram: Sinogram) -> Image3D:
    """Matched adjoint of :func:`forward_aperture`: the per-column adjoints
    summed in deterministic column order."""
    if sinogram.geometry != op.geometry:
        g, w = sinogram.geometry, op.geometry
        for name, got, want in (("n_columns", g.n_columns, w.n_columns),
                                ("n_heights", g.n_heights, w.n_heights),
                                ("n_radii", g.n_radii, w.n_radii)):
            if got != want:
                raise DimensionError(f"sinogram {name} is {got}, "
                                     f"operator expects {want}")
        raise DimensionError("sinogram geometry does not match operator geometry")
    blocks = sinogram.blocks()

    def one(c: int) -> np.ndarray:
        return adjoint_column(op.column_operator(c), blocks[c]).values

    partials = _map_columns(op, one, op.geometry.n_columns)
    total = np.zeros(op.grid.n_voxels)
    for part in partials:
        total += part
    return Image3D(op.grid, total)
