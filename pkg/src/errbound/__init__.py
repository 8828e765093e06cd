"""Global error bounds for convex inequality and conic-affine systems."""

__version__ = "0.1.0"

from .cones import Orthant, PolyhedralH, SecondOrder  # noqa: E402
from .functions import AffineMap, MaxAffine, Quadratic, Scalarized  # noqa: E402
from .geometry import LevelSet, PolyhedronH, PolytopeV  # noqa: E402

__all__ = [
    "AffineMap", "LevelSet", "MaxAffine", "Orthant", "PolyhedralH", "PolyhedronH",
    "PolytopeV", "Quadratic", "Scalarized", "SecondOrder", "__version__",
]
