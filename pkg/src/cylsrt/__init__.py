"""Spherical-shell transform for cylindrical sensor apertures, factorized
into two sparse circular transforms with an exactly matched adjoint."""

__version__ = "0.1.0"

from .errors import (CodecError, CylsrtError, DimensionError, NumericalError,
                     ValidationError)
from .geometry import (ApertureGeometry, Image3D, SamplingParams, SensorColumn,
                       Sinogram, VoxelGrid3D, flatten_index, load_config,
                       parse_config, unflatten_index)
from .sparse import SparseOperator, from_triplets, transpose
from .crt import build_xy_crt, build_zl_crt
from .codec import (read_array, read_image, read_matrix, read_sinogram,
                    write_array, write_image, write_matrix, write_sinogram)
from .operator import (ApertureOperator, ColumnOperator, adjoint_aperture,
                       adjoint_column, build_aperture_operator,
                       build_column_operator, forward_aperture, forward_column)
from .oracle import (Phantom, direct_crt_circle, direct_crt_halfcircle,
                     direct_srt, make_phantom)
from .solver import CglsReport, cgls, gradient_check

__all__ = [
    "__version__",
    "CylsrtError", "ValidationError", "DimensionError", "CodecError",
    "NumericalError",
    "VoxelGrid3D", "SensorColumn", "ApertureGeometry", "Image3D", "Sinogram",
    "SamplingParams", "flatten_index", "unflatten_index", "parse_config",
    "load_config",
    "SparseOperator", "from_triplets", "transpose",
    "build_xy_crt", "build_zl_crt",
    "read_array", "write_array", "read_matrix", "write_matrix",
    "read_image", "write_image", "read_sinogram", "write_sinogram",
    "ColumnOperator", "ApertureOperator", "build_column_operator",
    "build_aperture_operator", "forward_column", "adjoint_column",
    "forward_aperture", "adjoint_aperture",
    "Phantom", "make_phantom", "direct_srt", "direct_crt_circle",
    "direct_crt_halfcircle",
    "CglsReport", "cgls", "gradient_check",
]
