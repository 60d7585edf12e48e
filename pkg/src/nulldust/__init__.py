"""Numerical laboratory for high-frequency limits of gravitational waves,
null dust shells, and characteristic constraint data in double-null gauge."""

__version__ = "0.1.0"

from .grids import AngularGrid, Grid1D
from .fields import MetricBlock, PositivityError, TensorField2
from .odesolve import DenseSolution, FocusingError, PiecewiseSolution

__all__ = [
    "AngularGrid",
    "Grid1D",
    "MetricBlock",
    "TensorField2",
    "PositivityError",
    "DenseSolution",
    "PiecewiseSolution",
    "FocusingError",
    "__version__",
]
