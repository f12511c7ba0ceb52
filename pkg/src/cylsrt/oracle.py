"""Brute-force reference integrals and analytic phantoms.

These are dense midpoint quadratures evaluated directly on the voxelized
image (containing-voxel lookup, zero outside the grid), used only to
validate the factorized operator.  They deliberately share the fast
path's piecewise-constant evaluation so a comparison isolates the
factorization and bin-assignment error rather than basis mismatch.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import Image3D, VoxelGrid3D

PHANTOM_KINDS = ("uniform", "gaussian", "ball", "single_voxel")


@dataclass(frozen=True)
class Phantom:
    """Analytic test object.

    ``width`` is the Gaussian standard deviation or the ball radius; it is
    ignored for ``uniform`` and ``single_voxel``.
    """

    kind: str
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    width: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise ValidationError(f"unknown phantom kind {self.kind!r}; "
                                  f"expected one of {PHANTOM_KINDS}")
        if self.kind in ("gaussian", "ball") and not (self.width > 0):
            raise ValidationError(f"phantom width must be > 0, got {self.width}")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))


def make_phantom(phantom: Phantom, grid: VoxelGrid3D) -> Image3D:
    """Voxelize by evaluating at voxel centers; ``single_voxel`` places the
    amplitude in exactly one voxel (error if the center is off the grid)."""
    h = grid.spacing
    ox, oy, oz = grid.origin
    if phantom.kind == "single_voxel":
        i = math.floor((phantom.center[0] - ox) / h + 0.5)
        j = math.floor((phantom.center[1] - oy) / h + 0.5)
        k = math.floor((phantom.center[2] - oz) / h + 0.5)
        if not (0 <= i < grid.m_s and 0 <= j < grid.m_s and 0 <= k < grid.m_z):
            raise ValidationError(f"single_voxel center {phantom.center} "
                                  "is outside the grid")
        values = np.zeros(grid.n_voxels)
        values[i + grid.m_s * j + grid.m_s * grid.m_s * k] = phantom.amplitude
        return Image3D(grid, values)

    if phantom.kind == "uniform":
        return Image3D(grid, np.full(grid.n_voxels, phantom.amplitude))

    # broadcast over axes [k, j, i] so the C-order ravel matches the layout
    x = ox + h * np.arange(grid.m_s)
    z = oz + h * np.arange(grid.m_z)
    r2 = ((x[None, None, :] - phantom.center[0]) ** 2
          + (x[None, :, None] - phantom.center[1]) ** 2
          + (z[:, None, None] - phantom.center[2]) ** 2)
    if phantom.kind == "gaussian":
        values = phantom.amplitude * np.exp(-r2 / (2.0 * phantom.width ** 2))
    else:  # ball
        values = np.where(r2 <= phantom.width ** 2, phantom.amplitude, 0.0)
    return Image3D(grid, values.ravel())


def _lookup_3d(image: Image3D, px, py, pz) -> np.ndarray:
    """Containing-voxel values at the given points; zero outside the grid."""
    g = image.grid
    h = g.spacing
    i = np.floor((px - g.origin[0]) / h + 0.5).astype(np.int64)
    j = np.floor((py - g.origin[1]) / h + 0.5).astype(np.int64)
    k = np.floor((pz - g.origin[2]) / h + 0.5).astype(np.int64)
    ok = ((i >= 0) & (i < g.m_s) & (j >= 0) & (j < g.m_s)
          & (k >= 0) & (k < g.m_z))
    out = np.zeros(px.shape)
    out[ok] = image.values[(i + g.m_s * j + g.m_s * g.m_s * k)[ok]]
    return out


def direct_srt(image: Image3D, center, radius: float,
               n_theta: int = 256, n_phi: int = 256) -> float:
    """Dense midpoint quadrature of the shell integral: the double sum of
    f(center + radius*direction) * radius^2 * sin(theta) over midpoint
    nodes in (theta, phi)."""
    if n_theta < 4 or n_phi < 4:
        raise ValidationError(f"n_theta and n_phi must be >= 4, "
                              f"got ({n_theta}, {n_phi})")
    cx, cy, cz = (float(v) for v in center)
    theta = (np.arange(n_theta) + 0.5) * (math.pi / n_theta)
    phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    st, ct = np.sin(theta), np.cos(theta)
    px = cx + radius * st[:, None] * np.cos(phi)[None, :]
    py = cy + radius * st[:, None] * np.sin(phi)[None, :]
    pz = cz + radius * np.broadcast_to(ct[:, None], (n_theta, n_phi))
    vals = _lookup_3d(image, px, py, pz)
    dw = (math.pi / n_theta) * (2.0 * math.pi / n_phi)
    return float((vals * st[:, None]).sum() * radius * radius * dw)


def _lookup_2d(f2d: np.ndarray, origin, spacing, p0, p1) -> np.ndarray:
    i = np.floor((p0 - origin[0]) / spacing[0] + 0.5).astype(np.int64)
    j = np.floor((p1 - origin[1]) / spacing[1] + 0.5).astype(np.int64)
    ok = (i >= 0) & (i < f2d.shape[0]) & (j >= 0) & (j < f2d.shape[1])
    out = np.zeros(p0.shape)
    out[ok] = f2d[i[ok], j[ok]]
    return out


def direct_crt_circle(f2d: np.ndarray, origin, spacing, center, radius: float,
                      n_phi: int = 4096) -> float:
    """Full-circle arc-length integral of a 2-D bin array.

    ``f2d[i, j]`` is the value at ``origin + spacing * (i, j)``.
    """
    if n_phi < 4:
        raise ValidationError(f"n_phi must be >= 4, got {n_phi}")
    f2d = np.asarray(f2d, dtype=np.float64)
    phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    p0 = center[0] + radius * np.cos(phi)
    p1 = center[1] + radius * np.sin(phi)
    vals = _lookup_2d(f2d, origin, spacing, p0, p1)
    return float(vals.sum() * radius * (2.0 * math.pi / n_phi))


def direct_crt_halfcircle(f2d: np.ndarray, origin, spacing, center_z: float,
                          radius: float, n_theta: int = 4096) -> float:
    """Upper half-circle arc-length integral in the (z, radial) plane,
    centered at (center_z, 0)."""
    if n_theta < 4:
        raise ValidationError(f"n_theta must be >= 4, got {n_theta}")
    f2d = np.asarray(f2d, dtype=np.float64)
    theta = (np.arange(n_theta) + 0.5) * (math.pi / n_theta)
    p0 = center_z + radius * np.cos(theta)
    p1 = radius * np.sin(theta)
    vals = _lookup_2d(f2d, origin, spacing, p0, p1)
    return float(vals.sum() * radius * (math.pi / n_theta))
