"""Voxel grids, cylindrical sensor apertures, and the index conventions
every other module relies on.

Conventions
-----------
* Voxel ``(i, j, k)`` has its center at ``origin + spacing * (i, j, k)``;
  its flat index is ``i + m_s*j + m_s**2*k`` (x fastest within an x-y
  plane, planes stacked along z).  Under this layout the flat value array
  can be viewed as shape ``(m_z, m_s**2)`` without copying, which is what
  the two-stage transform exploits.
* Sinogram entry ``(c, h, l)`` (column, height, radius) has flat index
  ``l + n_l*h + n_l*n_h*c`` (radius fastest).
* All lengths are meters.  No operator rescales units.
"""

import math
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ValidationError


@dataclass(frozen=True)
class VoxelGrid3D:
    """Cartesian m_s x m_s x m_z voxel grid with isotropic spacing.

    ``origin`` is the position of the *center* of voxel (0, 0, 0).
    """

    m_s: int
    m_z: int
    spacing: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.m_s < 1:
            raise ValidationError(f"grid.m_s must be >= 1, got {self.m_s}")
        if self.m_z < 1:
            raise ValidationError(f"grid.m_z must be >= 1, got {self.m_z}")
        if not (self.spacing > 0):
            raise ValidationError(f"grid.spacing must be > 0, got {self.spacing}")
        origin = tuple(float(v) for v in self.origin)
        if len(origin) != 3 or not all(math.isfinite(v) for v in origin):
            raise ValidationError(f"grid.origin must be a finite 3-vector, got {self.origin}")
        object.__setattr__(self, "origin", origin)
        if self.m_s * self.m_s * self.m_z > np.iinfo(np.intp).max:
            raise ValidationError("grid voxel count overflows the index type")

    @property
    def n_voxels(self) -> int:
        return self.m_s * self.m_s * self.m_z

    @classmethod
    def centered(cls, m_s: int, m_z: int, spacing: float) -> "VoxelGrid3D":
        """Grid whose voxel-center bounding box is centered on (0, 0, 0)."""
        ox = -0.5 * (m_s - 1) * spacing
        oz = -0.5 * (m_z - 1) * spacing
        return cls(m_s, m_z, spacing, (ox, ox, oz))


def flatten_index(i: int, j: int, k: int, grid: VoxelGrid3D) -> int:
    """Flat index of voxel (i, j, k); x fastest, then y, then z."""
    if not (0 <= i < grid.m_s and 0 <= j < grid.m_s and 0 <= k < grid.m_z):
        raise IndexError(f"voxel index ({i}, {j}, {k}) outside grid "
                         f"{grid.m_s}x{grid.m_s}x{grid.m_z}")
    return i + grid.m_s * j + grid.m_s * grid.m_s * k


def unflatten_index(flat: int, grid: VoxelGrid3D) -> tuple[int, int, int]:
    """Inverse of :func:`flatten_index`."""
    if not (0 <= flat < grid.n_voxels):
        raise IndexError(f"flat index {flat} outside grid of {grid.n_voxels} voxels")
    i = flat % grid.m_s
    j = (flat // grid.m_s) % grid.m_s
    k = flat // (grid.m_s * grid.m_s)
    return i, j, k


def _strictly_increasing(seq) -> bool:
    return all(b > a for a, b in zip(seq, seq[1:]))


@dataclass(frozen=True)
class SensorColumn:
    """One vertical line of sensor positions: a shared (x, y) center and a
    strictly increasing list of heights."""

    center_xy: tuple[float, float]
    heights: tuple[float, ...]

    def __post_init__(self):
        center = tuple(float(v) for v in self.center_xy)
        if len(center) != 2 or not all(math.isfinite(v) for v in center):
            raise ValidationError(f"column center must be a finite 2-vector, got {self.center_xy}")
        heights = tuple(float(v) for v in self.heights)
        if len(heights) < 1:
            raise ValidationError("column heights must not be empty")
        if not _strictly_increasing(heights):
            raise ValidationError("heights not strictly increasing")
        object.__setattr__(self, "center_xy", center)
        object.__setattr__(self, "heights", heights)

    @property
    def n_heights(self) -> int:
        return len(self.heights)


@dataclass(frozen=True)
class ApertureGeometry:
    """Cylindrical sensor layout: columns sharing one heights list and one
    radii list.  The shared lists are what let all columns reuse a single
    height-radius transform matrix."""

    columns: tuple[SensorColumn, ...]
    radii: tuple[float, ...]

    def __post_init__(self):
        columns = tuple(self.columns)
        if len(columns) < 1:
            raise ValidationError("aperture needs at least one column")
        radii = tuple(float(v) for v in self.radii)
        if len(radii) < 1:
            raise ValidationError("aperture.radii must not be empty")
        if any(r < 0 for r in radii):
            raise ValidationError("radii must be >= 0")
        if not _strictly_increasing(radii):
            raise ValidationError("radii not strictly increasing")
        ref = columns[0].heights
        for c, col in enumerate(columns):
            if col.heights != ref:
                raise ValidationError(f"column {c} heights differ from column 0; "
                                      "all columns must share one heights list")
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "radii", radii)

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    @property
    def heights(self) -> tuple[float, ...]:
        return self.columns[0].heights

    @property
    def n_heights(self) -> int:
        return len(self.heights)

    @property
    def n_radii(self) -> int:
        return len(self.radii)

    @property
    def n_measurements(self) -> int:
        return self.n_columns * self.n_heights * self.n_radii


@dataclass(frozen=True)
class Image3D:
    """Discretized object: flat float64 array in the grid's layout."""

    grid: VoxelGrid3D
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64).ravel()
        if values.size != self.grid.n_voxels:
            raise ValidationError(f"image has {values.size} values, "
                                  f"grid has {self.grid.n_voxels} voxels")
        if not np.all(np.isfinite(values)):
            raise ValidationError("image values must be finite")
        object.__setattr__(self, "values", values)

    def as_plane_stack(self) -> np.ndarray:
        """Zero-copy view of shape (m_z, m_s**2): one row per z-layer."""
        return self.values.reshape(self.grid.m_z, self.grid.m_s * self.grid.m_s)

    def volume(self) -> np.ndarray:
        """Copy with axes (i, j, k), i.e. shape (m_s, m_s, m_z)."""
        g = self.grid
        return self.values.reshape(g.m_z, g.m_s, g.m_s).transpose(2, 1, 0).copy()


@dataclass(frozen=True)
class Sinogram:
    """Measurements indexed (column, height, radius), radius fastest."""

    geometry: ApertureGeometry
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64).ravel()
        if values.size != self.geometry.n_measurements:
            raise ValidationError(f"sinogram has {values.size} values, geometry expects "
                                  f"{self.geometry.n_measurements}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("sinogram values must be finite")
        object.__setattr__(self, "values", values)

    def blocks(self) -> np.ndarray:
        """Zero-copy view of shape (n_columns, n_heights, n_radii)."""
        g = self.geometry
        return self.values.reshape(g.n_columns, g.n_heights, g.n_radii)

    def block(self, c: int) -> np.ndarray:
        return self.blocks()[c]


@dataclass(frozen=True)
class SamplingParams:
    """Quadrature density for the arc samplers: ``points_per_voxel_arc``
    samples per voxel-length of arc, never fewer than ``min_points_per_arc``
    per circle."""

    points_per_voxel_arc: float = 4.0
    min_points_per_arc: int = 8

    def __post_init__(self):
        if not (self.points_per_voxel_arc > 0):
            raise ValidationError("sampling.points_per_voxel_arc must be > 0, "
                                  f"got {self.points_per_voxel_arc}")
        if self.min_points_per_arc < 1:
            raise ValidationError("sampling.min_points_per_arc must be >= 1, "
                                  f"got {self.min_points_per_arc}")


# --- configuration parsing -------------------------------------------------

def _section(doc: dict, name: str, required: bool = True) -> dict:
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ValidationError(f"missing section {name}")
        return {}
    if not isinstance(sec, dict):
        raise ValidationError(f"section {name} must be a mapping")
    return sec


def _require(sec: dict, key: str, dotted: str):
    if key not in sec or sec[key] is None:
        raise ValidationError(f"missing field {dotted}")
    return sec[key]


def _as_float(value, dotted: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{dotted} must be a number, got {value!r}") from None
    if not math.isfinite(v):
        raise ValidationError(f"{dotted} must be finite, got {value!r}")
    return v


def _as_int(value, dotted: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{dotted} must be an integer, got {value!r}")
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{dotted} must be an integer, got {value!r}") from None
    if v != value:
        raise ValidationError(f"{dotted} must be an integer, got {value!r}")
    return v


def _as_float_list(value, dotted: str) -> list[float]:
    if not isinstance(value, (list, tuple)):
        raise ValidationError(f"{dotted} must be a list of numbers")
    return [_as_float(v, dotted) for v in value]


def _parse_heights(ap: dict) -> tuple[float, ...] | None:
    if "heights" in ap and ap["heights"] is not None:
        return tuple(_as_float_list(ap["heights"], "aperture.heights"))
    if "n_heights" in ap and ap["n_heights"] is not None:
        n = _as_int(ap["n_heights"], "aperture.n_heights")
        pitch = _as_float(_require(ap, "height_pitch", "aperture.height_pitch"),
                          "aperture.height_pitch")
        origin = _as_float(_require(ap, "height_origin", "aperture.height_origin"),
                           "aperture.height_origin")
        if n < 1:
            raise ValidationError(f"aperture.n_heights must be >= 1, got {n}")
        return tuple(origin + pitch * i for i in range(n))
    return None


def _parse_radii(ap: dict) -> tuple[float, ...]:
    if "radii" in ap and ap["radii"] is not None:
        return tuple(_as_float_list(ap["radii"], "aperture.radii"))
    if "n_radii" in ap and ap["n_radii"] is not None:
        n = _as_int(ap["n_radii"], "aperture.n_radii")
        step = _as_float(_require(ap, "radius_spacing", "aperture.radius_spacing"),
                         "aperture.radius_spacing")
        if n < 1:
            raise ValidationError(f"aperture.n_radii must be >= 1, got {n}")
        if not (step > 0):
            raise ValidationError(f"aperture.radius_spacing must be > 0, got {step}")
        return tuple(step * (l + 1) for l in range(n))
    raise ValidationError("missing field aperture.radii (or aperture.n_radii "
                          "+ aperture.radius_spacing)")


def parse_config(text: str) -> tuple[VoxelGrid3D, ApertureGeometry, SamplingParams]:
    """Parse a YAML configuration document into validated geometry.

    Schema (see README for a full example)::

        grid:      m_s, m_z, spacing, [origin]
        aperture:  cylinder_radius + n_columns | columns: [{center, [heights]}]
                   heights | n_heights + height_pitch + height_origin
                   radii   | n_radii + radius_spacing
        sampling:  [points_per_voxel_arc], [min_points_per_arc]

    When ``origin`` is omitted the grid is centered on (0, 0, 0).  With
    ``cylinder_radius`` + ``n_columns``, column c sits at angle 2*pi*c/n.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"config is not valid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config must be a mapping of sections")

    grid_sec = _section(doc, "grid")
    m_s = _as_int(_require(grid_sec, "m_s", "grid.m_s"), "grid.m_s")
    m_z = _as_int(_require(grid_sec, "m_z", "grid.m_z"), "grid.m_z")
    spacing = _as_float(_require(grid_sec, "spacing", "grid.spacing"), "grid.spacing")
    if "origin" in grid_sec and grid_sec["origin"] is not None:
        origin = _as_float_list(grid_sec["origin"], "grid.origin")
        if len(origin) != 3:
            raise ValidationError("grid.origin must have 3 entries")
        grid = VoxelGrid3D(m_s, m_z, spacing, tuple(origin))
    else:
        grid = VoxelGrid3D.centered(m_s, m_z, spacing)

    ap = _section(doc, "aperture")
    shared_heights = _parse_heights(ap)
    radii = _parse_radii(ap)

    if "columns" in ap and ap["columns"] is not None:
        raw_cols = ap["columns"]
        if not isinstance(raw_cols, list) or not raw_cols:
            raise ValidationError("aperture.columns must be a non-empty list")
        columns = []
        for c, entry in enumerate(raw_cols):
            if not isinstance(entry, dict):
                raise ValidationError(f"aperture.columns[{c}] must be a mapping")
            center = _as_float_list(_require(entry, "center", f"aperture.columns[{c}].center"),
                                    f"aperture.columns[{c}].center")
            if len(center) != 2:
                raise ValidationError(f"aperture.columns[{c}].center must have 2 entries")
            if "heights" in entry and entry["heights"] is not None:
                heights = tuple(_as_float_list(entry["heights"],
                                               f"aperture.columns[{c}].heights"))
            elif shared_heights is not None:
                heights = shared_heights
            else:
                raise ValidationError(f"missing field aperture.columns[{c}].heights "
                                      "(or shared aperture.heights)")
            columns.append(SensorColumn(tuple(center), heights))
    else:
        radius = _as_float(_require(ap, "cylinder_radius", "aperture.cylinder_radius"),
                           "aperture.cylinder_radius")
        n_cols = _as_int(_require(ap, "n_columns", "aperture.n_columns"),
                         "aperture.n_columns")
        if n_cols < 1:
            raise ValidationError(f"aperture.n_columns must be >= 1, got {n_cols}")
        if shared_heights is None:
            raise ValidationError("missing field aperture.heights (or aperture.n_heights "
                                  "+ aperture.height_pitch + aperture.height_origin)")
        columns = []
        for c in range(n_cols):
            angle = 2.0 * math.pi * c / n_cols
            center = (radius * math.cos(angle), radius * math.sin(angle))
            columns.append(SensorColumn(center, shared_heights))

    geometry = ApertureGeometry(tuple(columns), radii)

    sm = _section(doc, "sampling", required=False)
    kwargs = {}
    if "points_per_voxel_arc" in sm and sm["points_per_voxel_arc"] is not None:
        kwargs["points_per_voxel_arc"] = _as_float(sm["points_per_voxel_arc"],
                                                   "sampling.points_per_voxel_arc")
    if "min_points_per_arc" in sm and sm["min_points_per_arc"] is not None:
        kwargs["min_points_per_arc"] = _as_int(sm["min_points_per_arc"],
                                               "sampling.min_points_per_arc")
    sampling = SamplingParams(**kwargs)

    return grid, geometry, sampling


def load_config(path) -> tuple[VoxelGrid3D, ApertureGeometry, SamplingParams]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
