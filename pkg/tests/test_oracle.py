import math

import numpy as np
import pytest

from cylsrt import (Image3D, Phantom, ValidationError, VoxelGrid3D,
                    build_xy_crt, direct_crt_circle, direct_crt_halfcircle,
                    direct_srt, make_phantom)


class TestPhantoms:
    def test_uniform(self):
        grid = VoxelGrid3D.centered(4, 3, 1.0)
        image = make_phantom(Phantom("uniform", amplitude=2.5), grid)
        assert np.all(image.values == 2.5)

    def test_single_voxel(self):
        grid = VoxelGrid3D(4, 2, 1.0, (0.0, 0.0, 0.0))
        image = make_phantom(Phantom("single_voxel", (2.0, 1.0, 1.0),
                                     amplitude=3.0), grid)
        assert np.count_nonzero(image.values) == 1
        assert image.values[2 + 4 * 1 + 16 * 1] == 3.0

    def test_single_voxel_outside_grid(self):
        grid = VoxelGrid3D(4, 2, 1.0, (0.0, 0.0, 0.0))
        with pytest.raises(ValidationError, match="outside"):
            make_phantom(Phantom("single_voxel", (9.0, 0.0, 0.0)), grid)

    def test_gaussian_peak_and_decay(self):
        grid = VoxelGrid3D.centered(17, 9, 1.0)
        image = make_phantom(Phantom("gaussian", (0.3, -0.2, 0.1), 4.0), grid)
        vol = image.volume()
        peak = np.unravel_index(np.argmax(vol), vol.shape)
        assert peak == (8, 8, 4)  # voxel nearest the center
        line = vol[8:, 8, 4]
        assert np.all(np.diff(line) < 0)  # monotone decay along +x

    def test_ball_support(self):
        grid = VoxelGrid3D.centered(16, 16, 1.0)
        image = make_phantom(Phantom("ball", (0.0, 0.0, 0.0), 3.0), grid)
        assert set(np.unique(image.values)) == {0.0, 1.0}

    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="unknown phantom kind"):
            Phantom("blob")


class TestDirectSrt:
    def test_sphere_area_constant_image(self):
        grid = VoxelGrid3D.centered(16, 16, 1.0)
        ones = Image3D(grid, np.ones(grid.n_voxels))
        value = direct_srt(ones, (0.0, 0.0, 0.0), 2.0, 256, 256)
        exact = 4.0 * math.pi * 4.0
        assert abs(value - exact) / exact <= 0.005

    def test_zero_radius(self):
        grid = VoxelGrid3D.centered(8, 8, 1.0)
        ones = Image3D(grid, np.ones(grid.n_voxels))
        assert direct_srt(ones, (0.0, 0.0, 0.0), 0.0) == 0.0

    def test_node_count_validated(self):
        grid = VoxelGrid3D.centered(8, 8, 1.0)
        ones = Image3D(grid, np.ones(grid.n_voxels))
        with pytest.raises(ValidationError, match="n_theta"):
            direct_srt(ones, (0.0, 0.0, 0.0), 1.0, 2, 256)

    def test_ball_support_sweep(self):
        # shells from a sensor at distance d of a ball of radius a are
        # nonzero only for radii in [d - a, d + a] (one voxel of slack for
        # the voxelized boundary)
        grid = VoxelGrid3D.centered(24, 24, 1.0)
        a, sensor = 4.0, (10.0, 0.0, 0.0)
        d = 10.0
        image = make_phantom(Phantom("ball", (0.0, 0.0, 0.0), a), grid)
        h = grid.spacing
        inside = []
        for radius in np.arange(0.5, 18.0, 0.5):
            value = direct_srt(image, sensor, radius, 128, 128)
            if radius < d - a - h or radius > d + a + h:
                assert value == 0.0, f"leakage at radius {radius}"
            if d - a + h <= radius <= d + a - h:
                inside.append(value)
        assert all(v > 0 for v in inside)

    def test_cauchy_convergence(self):
        # doubling the node counts changes the shell curve by less than the
        # previous refinement step on a smooth phantom (aggregated over
        # radii; single shells fluctuate because the voxelized integrand is
        # piecewise constant)
        grid = VoxelGrid3D.centered(24, 24, 1.0)
        image = make_phantom(Phantom("gaussian", (1.0, -0.5, 0.5), 4.0), grid)
        sensor = (14.0, 2.0, 1.0)
        radii = np.arange(6.0, 20.0, 1.0)
        curves = [np.array([direct_srt(image, sensor, r, n, n) for r in radii])
                  for n in (32, 64, 128, 256)]
        steps = [float(np.linalg.norm(b - a))
                 for a, b in zip(curves, curves[1:])]
        assert steps[1] < steps[0]
        assert steps[2] < steps[1]

    def test_rotation_covariance(self):
        # two sensors equidistant from a radially symmetric phantom see the
        # same curve
        grid = VoxelGrid3D.centered(32, 32, 1.0)
        image = make_phantom(Phantom("gaussian", (0.0, 0.0, 0.0), 4.0), grid)
        radii = np.arange(6.0, 20.0, 1.0)
        a = np.array([direct_srt(image, (15.0, 0.0, 0.0), r, 192, 192)
                      for r in radii])
        b = np.array([direct_srt(image, (0.0, 15.0, 0.0), r, 192, 192)
                      for r in radii])
        scale = math.sqrt(float((a ** 2).mean()))
        assert math.sqrt(float(((a - b) ** 2).mean())) / scale <= 0.02


class TestDirectCrt:
    def test_full_circle_constant(self):
        f2d = np.ones((64, 64))
        value = direct_crt_circle(f2d, (-31.5, -31.5), (1.0, 1.0), (0.0, 0.0),
                                  10.0, 4096)
        exact = 2.0 * math.pi * 10.0
        assert abs(value - exact) / exact <= 1e-3

    def test_half_circle_constant(self):
        f2d = np.ones((64, 32))
        value = direct_crt_halfcircle(f2d, (-31.5, 0.0), (1.0, 1.0), 0.0,
                                      10.0, 4096)
        exact = math.pi * 10.0
        assert abs(value - exact) / exact <= 1e-3

    def test_gaussian_row_agreement(self):
        # the dense circle quadrature validates a matrix row directly
        grid = VoxelGrid3D.centered(32, 1, 1.0)
        x = np.arange(32, dtype=float) + grid.origin[0]
        plane = np.exp(-((x[None, :] - 2.0) ** 2 + (x[:, None] + 3.0) ** 2)
                       / (2.0 * 5.0 ** 2))  # [j, i]
        radius = 7.0
        op = build_xy_crt(grid, (0.0, 0.0), [radius])
        row_dot = float(op.matvec(plane.ravel())[0])
        oracle = direct_crt_circle(plane.T, (grid.origin[0], grid.origin[1]),
                                   (1.0, 1.0), (0.0, 0.0), radius, 100_000)
        assert abs(row_dot - oracle) / abs(oracle) <= 0.02
