import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cylsrt import (CodecError, DimensionError, Image3D, Sinogram,
                    VoxelGrid3D, build_xy_crt, from_triplets, read_array,
                    read_image, read_matrix, read_sinogram, write_array,
                    write_image, write_matrix, write_sinogram)
from conftest import ring_aperture


def assert_matrices_bit_identical(a, b):
    assert (a.n_rows, a.n_cols) == (b.n_rows, b.n_cols)
    assert a.description == b.description
    np.testing.assert_array_equal(a.column_pointers, b.column_pointers)
    np.testing.assert_array_equal(a.row_indices, b.row_indices)
    assert np.array_equal(a.values.view(np.uint64), b.values.view(np.uint64))


class TestMatrixCodec:
    def test_round_trip_built_matrix(self, tmp_path):
        grid = VoxelGrid3D.centered(16, 1, 1.0)
        op = build_xy_crt(grid, (2.0, -1.0), np.linspace(1.0, 6.0, 6))
        path = tmp_path / "m.crt"
        n_bytes = write_matrix(path, op)
        assert path.stat().st_size == n_bytes
        assert_matrices_bit_identical(read_matrix(path), op)

    def test_empty_matrix_round_trips(self, tmp_path):
        op = from_triplets(3, 4, np.empty(0, int), np.empty(0, int), np.empty(0),
                           "empty")
        path = tmp_path / "empty.crt"
        write_matrix(path, op)
        assert_matrices_bit_identical(read_matrix(path), op)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.crt"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
        with pytest.raises(CodecError, match="magic"):
            read_matrix(path)

    def test_truncated(self, tmp_path):
        grid = VoxelGrid3D.centered(8, 1, 1.0)
        op = build_xy_crt(grid, (0.0, 0.0), [2.0])
        path = tmp_path / "m.crt"
        write_matrix(path, op)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CodecError, match="truncated"):
            read_matrix(path)

    def test_corrupted_payload(self, tmp_path):
        grid = VoxelGrid3D.centered(8, 1, 1.0)
        op = build_xy_crt(grid, (0.0, 0.0), [2.0])
        path = tmp_path / "m.crt"
        write_matrix(path, op)
        data = bytearray(path.read_bytes())
        data[40] ^= 0xFF  # flip a payload byte
        path.write_bytes(bytes(data))
        with pytest.raises(CodecError, match="checksum"):
            read_matrix(path)

    def test_corrupted_header_no_partial_object(self, tmp_path):
        grid = VoxelGrid3D.centered(8, 1, 1.0)
        op = build_xy_crt(grid, (0.0, 0.0), [2.0])
        path = tmp_path / "m.crt"
        write_matrix(path, op)
        data = bytearray(path.read_bytes())
        data[8] ^= 0xFF  # corrupt n_rows
        path.write_bytes(bytes(data))
        with pytest.raises(CodecError):
            read_matrix(path)


class TestArrayCodec:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((3, 4, 5))
        path = tmp_path / "a.arr"
        write_array(path, data)
        back = read_array(path)
        assert back.shape == data.shape
        assert np.array_equal(back.view(np.uint64), data.view(np.uint64))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "a.arr"
        path.write_bytes(b"WRONG!!\x00" + b"\x00" * 32)
        with pytest.raises(CodecError, match="magic"):
            read_array(path)

    def test_checksum(self, tmp_path):
        path = tmp_path / "a.arr"
        write_array(path, np.arange(6.0).reshape(2, 3))
        data = bytearray(path.read_bytes())
        data[-1] ^= 0x01
        path.write_bytes(bytes(data))
        with pytest.raises(CodecError, match="checksum"):
            read_array(path)

    @given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)),
                  elements=st.floats(-1e6, 1e6)))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_property(self, data):
        import tempfile, os
        fd, path = tempfile.mkstemp()
        os.close(fd)
        try:
            write_array(path, data)
            back = read_array(path)
            assert np.array_equal(back.view(np.uint64), data.view(np.uint64))
        finally:
            os.unlink(path)


class TestTypedWrappers:
    def test_image_round_trip(self, tmp_path, small_grid):
        rng = np.random.default_rng(1)
        image = Image3D(small_grid, rng.standard_normal(small_grid.n_voxels))
        path = tmp_path / "img.arr"
        write_image(path, image)
        back = read_image(path, small_grid)
        np.testing.assert_array_equal(back.values, image.values)

    def test_image_grid_mismatch_names_dimension(self, tmp_path, small_grid):
        image = Image3D(small_grid, np.zeros(small_grid.n_voxels))
        path = tmp_path / "img.arr"
        write_image(path, image)
        other = VoxelGrid3D.centered(small_grid.m_s, small_grid.m_z + 2, 1.0)
        with pytest.raises(DimensionError, match="m_z"):
            read_image(path, other)

    def test_sinogram_round_trip(self, tmp_path, small_aperture):
        rng = np.random.default_rng(2)
        sino = Sinogram(small_aperture,
                        rng.standard_normal(small_aperture.n_measurements))
        path = tmp_path / "sino.arr"
        write_sinogram(path, sino)
        back = read_sinogram(path, small_aperture)
        np.testing.assert_array_equal(back.values, sino.values)

    def test_sinogram_mismatch_names_dimension(self, tmp_path, small_aperture):
        sino = Sinogram(small_aperture, np.zeros(small_aperture.n_measurements))
        path = tmp_path / "sino.arr"
        write_sinogram(path, sino)
        other = ring_aperture(14.0, small_aperture.n_columns + 1,
                              small_aperture.heights, small_aperture.radii)
        with pytest.raises(DimensionError, match="n_columns"):
            read_sinogram(path, other)
