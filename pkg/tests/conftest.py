import math

import numpy as np
import pytest

from cylsrt import (ApertureGeometry, SamplingParams, SensorColumn, VoxelGrid3D,
                    build_aperture_operator)


def ring_aperture(radius, n_columns, heights, radii):
    """Columns equally spaced on a cylinder of the given radius."""
    columns = []
    for c in range(n_columns):
        angle = 2.0 * math.pi * c / n_columns
        columns.append(SensorColumn((radius * math.cos(angle),
                                     radius * math.sin(angle)),
                                    tuple(heights)))
    return ApertureGeometry(tuple(columns), tuple(radii))


@pytest.fixture(scope="session")
def small_grid():
    return VoxelGrid3D.centered(16, 8, 1.0)


@pytest.fixture(scope="session")
def small_aperture():
    return ring_aperture(14.0, 2, (-1.0, 1.0), np.linspace(1.0, 24.0, 24))


@pytest.fixture(scope="session")
def small_operator(small_grid, small_aperture):
    return build_aperture_operator(small_grid, small_aperture, SamplingParams())


def write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


SMALL_CONFIG = """\
grid:
  m_s: 16
  m_z: 8
  spacing: 1.0
aperture:
  cylinder_radius: 14.0
  n_columns: 2
  heights: [-1.0, 1.0]
  n_radii: 24
  radius_spacing: 1.0
"""
