"""Spectral workbench for globally elliptic operators on R and the periodic
evolution problem D_t u + omega P u = f built on their eigenfunctions."""

__version__ = "0.1.0"

from .errors import (ArchiveError, MathError, ParameterError, SglabError)  # noqa: E402
from .grid import Grid, OperatorSpec, assemble_operator, build_grid  # noqa: E402
from .spectral import EigenDecomposition, default_decomposition, eigendecompose, weyl_fit  # noqa: E402

__all__ = [
    "__version__", "SglabError", "ParameterError", "MathError", "ArchiveError",
    "Grid", "OperatorSpec", "assemble_operator", "build_grid",
    "EigenDecomposition", "eigendecompose", "default_decomposition", "weyl_fit",
]
