"""Builders for the two sparse circular-transform matrices.

``build_xy_crt`` integrates over full circles in the x-y plane: row l of
the result, applied to a flattened x-y plane, approximates the arc-length
integral of the image over the circle of radius ``radii[l]`` around the
column center.

``build_zl_crt`` integrates over upper half-circles in the (z, radius)
plane of the intermediate function produced by the x-y stage.  The radial
axis of that intermediate grid *is* the measurement radii list, which is
why the list must be uniformly spaced.

Both builders use a midpoint rule in angle with arc-length weight
(radius * angular step) per sample, assign each sample to the containing
voxel / nearest bin, drop samples that land outside the domain, and sum
duplicate entries.  Weights are non-negative by construction and row sums
are exactly 2*pi*r (full circle) or pi*r (half circle) whenever no sample
is dropped.
"""

import math

import numpy as np

from .errors import ValidationError
from .geometry import SamplingParams, VoxelGrid3D
from .sparse import SparseOperator, from_triplets

__all__ = ["SamplingParams", "build_xy_crt", "build_zl_crt"]

_UNIFORM_RTOL = 1e-9


def _check_radii(radii) -> np.ndarray:
    radii = np.asarray(radii, dtype=np.float64)
    if radii.ndim != 1 or radii.size == 0:
        raise ValidationError("radii must be a non-empty 1-D list")
    if radii[0] < 0:
        raise ValidationError("radii must be >= 0")
    if np.any(np.diff(radii) <= 0):
        raise ValidationError("radii not strictly increasing")
    return radii


def _arc_points(arc_length: float, bin_size: float, sampling: SamplingParams) -> int:
    wanted = math.ceil(arc_length * sampling.points_per_voxel_arc / bin_size)
    return max(sampling.min_points_per_arc, wanted)


def build_xy_crt(grid: VoxelGrid3D, center_xy, radii,
                 sampling: SamplingParams = SamplingParams()) -> SparseOperator:
    """Full-circle transform matrix of shape (n_radii, m_s**2).

    Sample q of circle l sits at angle (q + 1/2) * dphi and contributes
    weight ``radii[l] * dphi`` to the column of the voxel containing it.
    A zero radius yields an all-zero row.
    """
    radii = _check_radii(radii)
    cx, cy = float(center_xy[0]), float(center_xy[1])
    m_s, h = grid.m_s, grid.spacing
    ox, oy = grid.origin[0], grid.origin[1]

    rows, cols, vals = [], [], []
    for l, radius in enumerate(radii):
        if radius == 0.0:
            continue
        n = _arc_points(2.0 * math.pi * radius, h, sampling)
        dphi = 2.0 * math.pi / n
        phi = (np.arange(n) + 0.5) * dphi
        i = np.floor((cx + radius * np.cos(phi) - ox) / h + 0.5).astype(np.int64)
        j = np.floor((cy + radius * np.sin(phi) - oy) / h + 0.5).astype(np.int64)
        keep = (i >= 0) & (i < m_s) & (j >= 0) & (j < m_s)
        kept = (i + m_s * j)[keep]
        rows.append(np.full(kept.size, l, dtype=np.int64))
        cols.append(kept)
        vals.append(np.full(kept.size, radius * dphi))

    return _compress(rows, cols, vals, radii.size, m_s * m_s,
                     f"xy-crt center=({cx:.9g},{cy:.9g}) n_radii={radii.size} "
                     f"grid={m_s}x{m_s} spacing={h:.9g}")


def build_zl_crt(m_z: int, z_spacing: float, z_origin: float, radii, heights,
                 sampling: SamplingParams = SamplingParams()) -> SparseOperator:
    """Half-circle transform matrix of shape (n_radii*n_heights, n_radii*m_z).

    Operand layout: flat = l' + n_radii * z (radial bin fastest).  Output
    row layout: flat = l + n_radii * h.  The radial bins are the ``radii``
    list itself, so it must be uniformly spaced; a sample at in-plane
    radius s maps to the bin whose center is nearest to s.
    """
    if m_z < 1:
        raise ValidationError(f"m_z must be >= 1, got {m_z}")
    if not (z_spacing > 0):
        raise ValidationError(f"z_spacing must be > 0, got {z_spacing}")
    radii = _check_radii(radii)
    heights = np.asarray(heights, dtype=np.float64)
    if heights.ndim != 1 or heights.size == 0:
        raise ValidationError("heights must be a non-empty 1-D list")
    if np.any(np.diff(heights) <= 0):
        raise ValidationError("heights not strictly increasing")

    n_l = radii.size
    if n_l > 1:
        steps = np.diff(radii)
        dl = float(steps[0])
        if np.any(np.abs(steps - dl) > _UNIFORM_RTOL * dl):
            raise ValidationError("radii not uniformly spaced; the radial axis of "
                                  "the intermediate grid is a regular grid")
        bin_size = min(z_spacing, dl)
    else:
        dl = None  # single radial bin: every sample maps to it
        bin_size = z_spacing

    n_h = heights.size
    h_index = np.arange(n_h, dtype=np.int64)
    rows, cols, vals = [], [], []
    for l, radius in enumerate(radii):
        if radius == 0.0:
            continue
        n = _arc_points(math.pi * radius, bin_size, sampling)
        dtheta = math.pi / n
        theta = (np.arange(n) + 0.5) * dtheta
        s = radius * np.sin(theta)
        if dl is None:
            lbin = np.zeros(n, dtype=np.int64)
            radial_ok = np.ones(n, dtype=bool)
        else:
            lbin = np.floor((s - radii[0]) / dl + 0.5).astype(np.int64)
            radial_ok = (lbin >= 0) & (lbin < n_l)
        z = heights[:, None] + (radius * np.cos(theta))[None, :]
        zbin = np.floor((z - z_origin) / z_spacing + 0.5).astype(np.int64)
        keep = radial_ok[None, :] & (zbin >= 0) & (zbin < m_z)
        row_of = np.broadcast_to((l + n_l * h_index)[:, None], keep.shape)
        col_of = lbin[None, :] + n_l * zbin
        rows.append(row_of[keep])
        cols.append(col_of[keep])
        vals.append(np.full(int(keep.sum()), radius * dtheta))

    return _compress(rows, cols, vals, n_l * n_h, n_l * m_z,
                     f"zl-crt n_radii={n_l} n_heights={n_h} m_z={m_z} "
                     f"z_spacing={z_spacing:.9g}")


def _compress(rows, cols, vals, n_rows, n_cols, description) -> SparseOperator:
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
    else:
        r = c = np.empty(0, dtype=np.int64)
        v = np.empty(0, dtype=np.float64)
    return from_triplets(n_rows, n_cols, r, c, v, description)
