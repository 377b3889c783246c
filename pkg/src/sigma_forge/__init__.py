"""Weighted sigma_k-curvature calculus on manifolds with density."""

from . import wsym, tensor_pt

__version__ = "0.1.0"

__all__ = ["wsym", "tensor_pt", "__version__"]
