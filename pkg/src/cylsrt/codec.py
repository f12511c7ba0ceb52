"""Binary cache formats for matrices, images, and sinograms.

Matrix file:  magic ``SRTCRT1\\0``, little-endian u64 n_rows, n_cols, nnz,
then column_pointers (u64), row_indices (u64), values (f64), an 8-byte
checksum of everything before it, then the description as u64-length-
prefixed UTF-8.

Array file:   magic ``SRTARR1\\0``, little-endian u64 rank, u64 dims[],
f64 data in C order, 8-byte checksum.

The checksum is an 8-byte BLAKE2b digest.  Readers validate magic, sizes,
and checksum before constructing any object, so a corrupt file never
yields a partial result.
"""

import hashlib
import os
import struct

import numpy as np

from .errors import CodecError, DimensionError
from .geometry import ApertureGeometry, Image3D, Sinogram, VoxelGrid3D
from .sparse import SparseOperator

MATRIX_MAGIC = b"SRTCRT1\x00"
ARRAY_MAGIC = b"SRTARR1\x00"
_CHECKSUM_BYTES = 8


def _digest(chunks) -> bytes:
    h = hashlib.blake2b(digest_size=_CHECKSUM_BYTES)
    for chunk in chunks:
        h.update(chunk)
    return h.digest()


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CodecError(f"truncated stream while reading {what}")
    return data


def write_matrix(path, op: SparseOperator) -> int:
    """Serialize a SparseOperator; returns the number of bytes written."""
    header = struct.pack("<3Q", op.n_rows, op.n_cols, op.nnz)
    ptr = np.ascontiguousarray(op.column_pointers, dtype="<u8").tobytes()
    idx = np.ascontiguousarray(op.row_indices, dtype="<u8").tobytes()
    val = np.ascontiguousarray(op.values, dtype="<f8").tobytes()
    checksum = _digest([MATRIX_MAGIC, header, ptr, idx, val])
    desc = op.description.encode("utf-8")
    with open(path, "wb") as fh:
        for chunk in (MATRIX_MAGIC, header, ptr, idx, val, checksum,
                      struct.pack("<Q", len(desc)), desc):
            fh.write(chunk)
    return len(MATRIX_MAGIC) + len(header) + len(ptr) + len(idx) + len(val) \
        + _CHECKSUM_BYTES + 8 + len(desc)


def read_matrix(path) -> SparseOperator:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(MATRIX_MAGIC), "magic")
        if magic != MATRIX_MAGIC:
            raise CodecError(f"bad magic {magic!r}; not a matrix cache file")
        header = _read_exact(fh, 24, "header")
        n_rows, n_cols, nnz = struct.unpack("<3Q", header)
        remaining = os.fstat(fh.fileno()).st_size - fh.tell()
        if 8 * (n_cols + 1) + 16 * nnz + _CHECKSUM_BYTES + 8 > remaining:
            raise CodecError("truncated stream: header promises more data than "
                             "the file contains")
        ptr = _read_exact(fh, 8 * (n_cols + 1), "column pointers")
        idx = _read_exact(fh, 8 * nnz, "row indices")
        val = _read_exact(fh, 8 * nnz, "values")
        stored = _read_exact(fh, _CHECKSUM_BYTES, "checksum")
        if stored != _digest([magic, header, ptr, idx, val]):
            raise CodecError("checksum mismatch; matrix cache file is corrupted")
        (desc_len,) = struct.unpack("<Q", _read_exact(fh, 8, "description length"))
        desc = _read_exact(fh, desc_len, "description").decode("utf-8")
    return SparseOperator(int(n_rows), int(n_cols),
                          np.frombuffer(ptr, dtype="<u8").astype(np.int64),
                          np.frombuffer(idx, dtype="<u8").astype(np.int64),
                          np.frombuffer(val, dtype="<f8").astype(np.float64),
                          desc)


def write_array(path, data: np.ndarray) -> int:
    """Serialize a float64 array (any rank) in C order."""
    data = np.ascontiguousarray(data, dtype="<f8")
    header = struct.pack("<Q", data.ndim) + struct.pack(f"<{data.ndim}Q", *data.shape)
    payload = data.tobytes()
    checksum = _digest([ARRAY_MAGIC, header, payload])
    with open(path, "wb") as fh:
        for chunk in (ARRAY_MAGIC, header, payload, checksum):
            fh.write(chunk)
    return len(ARRAY_MAGIC) + len(header) + len(payload) + _CHECKSUM_BYTES


def read_array(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(ARRAY_MAGIC), "magic")
        if magic != ARRAY_MAGIC:
            raise CodecError(f"bad magic {magic!r}; not an array file")
        rank_raw = _read_exact(fh, 8, "rank")
        (rank,) = struct.unpack("<Q", rank_raw)
        if rank > 32:
            raise CodecError(f"implausible array rank {rank}")
        dims_raw = _read_exact(fh, 8 * rank, "dims")
        dims = struct.unpack(f"<{rank}Q", dims_raw)
        count = 1
        for d in dims:
            count *= d
        remaining = os.fstat(fh.fileno()).st_size - fh.tell()
        if 8 * count + _CHECKSUM_BYTES > remaining:
            raise CodecError("truncated stream: header promises more data than "
                             "the file contains")
        payload = _read_exact(fh, 8 * count, "data")
        stored = _read_exact(fh, _CHECKSUM_BYTES, "checksum")
        if stored != _digest([magic, rank_raw, dims_raw, payload]):
            raise CodecError("checksum mismatch; array file is corrupted")
    return np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(dims)


# --- typed wrappers ---------------------------------------------------------
# Images are stored with dims (m_z, m_s, m_s) and sinograms with dims
# (n_columns, n_heights, n_radii); in both cases the C-order data matches
# the package's flat layouts exactly.

def write_image(path, image: Image3D) -> int:
    g = image.grid
    return write_array(path, image.values.reshape(g.m_z, g.m_s, g.m_s))


def read_image(path, grid: VoxelGrid3D) -> Image3D:
    data = read_array(path)
    expected = (grid.m_z, grid.m_s, grid.m_s)
    if data.shape != expected:
        _name_mismatch(data.shape, expected, ("m_z", "m_s", "m_s"), "image")
    return Image3D(grid, data.ravel())


def write_sinogram(path, sinogram: Sinogram) -> int:
    g = sinogram.geometry
    return write_array(path, sinogram.values.reshape(g.n_columns, g.n_heights, g.n_radii))


def read_sinogram(path, geometry: ApertureGeometry) -> Sinogram:
    data = read_array(path)
    expected = (geometry.n_columns, geometry.n_heights, geometry.n_radii)
    if data.shape != expected:
        _name_mismatch(data.shape, expected, ("n_columns", "n_heights", "n_radii"),
                       "sinogram")
    return Sinogram(geometry, data.ravel())


def _name_mismatch(got, expected, names, what):
    if len(got) != len(expected):
        raise DimensionError(f"{what} file has rank {len(got)}, expected {len(expected)}")
    for g, e, name in zip(got, expected, names):
        if g != e:
            raise DimensionError(f"{what} dimension {name} is {g}, "
                                 f"configuration expects {e}")
    raise DimensionError(f"{what} shape {got} does not match expected {expected}")
