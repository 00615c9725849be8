"""Numerical toolkit for polynomial Abel equations ``y' = p(x) y**2 + q(x) y**3``."""

from .core import (AbelEquation, ComplexPath, ComplexPolynomial, PuiseuxSeries, circle,
                   keyhole_loop, line, make_equation, make_path, polyline)
from .errors import AbelError

__version__ = "0.1.0"

__all__ = [
    "AbelEquation", "AbelError", "ComplexPath", "ComplexPolynomial", "PuiseuxSeries", "circle",
    "keyhole_loop", "line", "make_equation", "make_path", "polyline",
]
