import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylsrt import (ApertureGeometry, Image3D, SensorColumn, Sinogram,
                    ValidationError, VoxelGrid3D, flatten_index, parse_config,
                    unflatten_index)


class TestVoxelGrid:
    def test_basic_fields(self):
        g = VoxelGrid3D(4, 2, 1.0, (0.0, 0.0, 0.0))
        assert g.n_voxels == 32

    def test_centered(self):
        g = VoxelGrid3D.centered(5, 3, 2.0)
        assert g.origin == (-4.0, -4.0, -2.0)

    @pytest.mark.parametrize("kwargs", [
        dict(m_s=0, m_z=2, spacing=1.0),
        dict(m_s=4, m_z=0, spacing=1.0),
        dict(m_s=4, m_z=2, spacing=0.0),
        dict(m_s=4, m_z=2, spacing=-1.0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            VoxelGrid3D(**kwargs)


class TestFlattening:
    def test_origin_voxel(self):
        g = VoxelGrid3D(4, 2, 1.0)
        assert flatten_index(0, 0, 0, g) == 0

    def test_x_fastest(self):
        g = VoxelGrid3D(4, 2, 1.0)
        assert flatten_index(1, 0, 0, g) == 1

    def test_plane_stride(self):
        g = VoxelGrid3D(4, 2, 1.0)
        assert flatten_index(0, 0, 1, g) == 16

    def test_round_trip_exhaustive_5x5x3(self):
        g = VoxelGrid3D(5, 3, 1.0)
        for k in range(3):
            for j in range(5):
                for i in range(5):
                    flat = flatten_index(i, j, k, g)
                    assert unflatten_index(flat, g) == (i, j, k)

    def test_out_of_range(self):
        g = VoxelGrid3D(4, 2, 1.0)
        with pytest.raises(IndexError):
            flatten_index(4, 0, 0, g)
        with pytest.raises(IndexError):
            flatten_index(0, 0, -1, g)
        with pytest.raises(IndexError):
            unflatten_index(32, g)

    @given(m_s=st.integers(1, 12), m_z=st.integers(1, 12), data=st.data())
    @settings(max_examples=50, deadline=None)
    def test_bijection_property(self, m_s, m_z, data):
        g = VoxelGrid3D(m_s, m_z, 1.0)
        flat = data.draw(st.integers(0, g.n_voxels - 1))
        i, j, k = unflatten_index(flat, g)
        assert flatten_index(i, j, k, g) == flat


class TestSensorColumn:
    def test_heights_must_increase(self):
        with pytest.raises(ValidationError, match="heights not strictly increasing"):
            SensorColumn((0.0, 0.0), (1.0, 1.0))

    def test_needs_heights(self):
        with pytest.raises(ValidationError):
            SensorColumn((0.0, 0.0), ())


class TestApertureGeometry:
    def test_radii_must_increase(self):
        col = SensorColumn((0.0, 0.0), (0.0,))
        with pytest.raises(ValidationError, match="radii not strictly increasing"):
            ApertureGeometry((col,), (2.0, 1.0))

    def test_radii_nonnegative(self):
        col = SensorColumn((0.0, 0.0), (0.0,))
        with pytest.raises(ValidationError, match=">= 0"):
            ApertureGeometry((col,), (-1.0, 1.0))

    def test_columns_share_heights(self):
        a = SensorColumn((0.0, 0.0), (0.0, 1.0))
        b = SensorColumn((1.0, 0.0), (0.0, 2.0))
        with pytest.raises(ValidationError, match="share one heights list"):
            ApertureGeometry((a, b), (1.0,))

    def test_counts(self):
        a = SensorColumn((0.0, 0.0), (0.0, 1.0))
        geo = ApertureGeometry((a,), (1.0, 2.0, 3.0))
        assert (geo.n_columns, geo.n_heights, geo.n_radii) == (1, 2, 3)
        assert geo.n_measurements == 6


class TestParseConfig:
    def test_direct_field_mapping(self):
        grid, geo, sampling = parse_config("""
grid: {m_s: 4, m_z: 2, spacing: 1.0, origin: [0, 0, 0]}
aperture:
  columns:
    - {center: [5, 0], heights: [0, 1]}
  radii: [1, 2]
""")
        assert grid.n_voxels == 32
        assert geo.n_heights == 2
        assert geo.n_radii == 2
        assert geo.columns[0].center_xy == (5.0, 0.0)
        assert sampling.points_per_voxel_arc == 4.0

    def test_radii_not_increasing(self):
        with pytest.raises(ValidationError, match="radii not strictly increasing"):
            parse_config("""
grid: {m_s: 4, m_z: 2, spacing: 1.0}
aperture:
  columns: [{center: [5, 0], heights: [0]}]
  radii: [2, 1]
""")

    def test_cylinder_columns(self):
        _, geo, _ = parse_config("""
grid: {m_s: 4, m_z: 2, spacing: 1.0}
aperture:
  cylinder_radius: 5
  n_columns: 4
  heights: [0.0]
  radii: [1, 2]
""")
        centers = np.array([c.center_xy for c in geo.columns])
        expected = np.array([(5, 0), (0, 5), (-5, 0), (0, -5)], dtype=float)
        np.testing.assert_allclose(centers, expected, atol=1e-12)

    def test_generated_heights_and_radii(self):
        _, geo, _ = parse_config("""
grid: {m_s: 4, m_z: 4, spacing: 0.5}
aperture:
  cylinder_radius: 3
  n_columns: 1
  n_heights: 3
  height_pitch: 0.5
  height_origin: -0.5
  n_radii: 4
  radius_spacing: 0.25
""")
        assert geo.heights == (-0.5, 0.0, 0.5)
        assert geo.radii == (0.25, 0.5, 0.75, 1.0)

    def test_default_origin_centers_grid(self):
        grid, _, _ = parse_config("""
grid: {m_s: 5, m_z: 3, spacing: 2.0}
aperture:
  columns: [{center: [0, 0], heights: [0]}]
  radii: [1]
""")
        assert grid.origin == (-4.0, -4.0, -2.0)

    @pytest.mark.parametrize("snippet,field", [
        ("grid: {m_z: 2, spacing: 1.0}", "grid.m_s"),
        ("grid: {m_s: 4, spacing: 1.0}", "grid.m_z"),
        ("grid: {m_s: 4, m_z: 2}", "grid.spacing"),
    ])
    def test_missing_grid_fields(self, snippet, field):
        text = snippet + """
aperture:
  columns: [{center: [0, 0], heights: [0]}]
  radii: [1]
"""
        with pytest.raises(ValidationError, match=field.replace(".", r"\.")):
            parse_config(text)

    def test_missing_radii(self):
        with pytest.raises(ValidationError, match="aperture.radii"):
            parse_config("""
grid: {m_s: 4, m_z: 2, spacing: 1.0}
aperture:
  columns: [{center: [0, 0], heights: [0]}]
""")

    def test_nonpositive_dimension(self):
        with pytest.raises(ValidationError, match="grid.spacing"):
            parse_config("""
grid: {m_s: 4, m_z: 2, spacing: -0.5}
aperture:
  columns: [{center: [0, 0], heights: [0]}]
  radii: [1]
""")

    def test_sampling_section(self):
        _, _, sampling = parse_config("""
grid: {m_s: 4, m_z: 2, spacing: 1.0}
aperture:
  columns: [{center: [0, 0], heights: [0]}]
  radii: [1]
sampling: {points_per_voxel_arc: 2.5, min_points_per_arc: 16}
""")
        assert sampling.points_per_voxel_arc == 2.5
        assert sampling.min_points_per_arc == 16

    def test_not_yaml(self):
        with pytest.raises(ValidationError, match="YAML"):
            parse_config("{unbalanced")


class TestArrays:
    def test_image_length_checked(self, small_grid):
        with pytest.raises(ValidationError, match="voxels"):
            Image3D(small_grid, np.zeros(5))

    def test_image_finite_checked(self, small_grid):
        values = np.zeros(small_grid.n_voxels)
        values[3] = math.nan
        with pytest.raises(ValidationError, match="finite"):
            Image3D(small_grid, values)

    def test_sinogram_length_checked(self, small_aperture):
        with pytest.raises(ValidationError, match="geometry expects"):
            Sinogram(small_aperture, np.zeros(7))

    def test_reshapes_are_metadata_only(self, small_grid):
        rng = np.random.default_rng(0)
        flat = rng.standard_normal(small_grid.n_voxels)
        stacked = flat.reshape(small_grid.m_z, small_grid.m_s, small_grid.m_s)
        a = Image3D(small_grid, flat)
        b = Image3D(small_grid, stacked)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.as_plane_stack().ravel(), flat)
