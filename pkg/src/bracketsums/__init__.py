"""Circle-method toolkit for the bracket exponential sums E_n e(xi n floor(n sqrt k))."""

from ._accel import backend_name
from .qfield import KContext, QuadRat, make_context, make_quadrat

__all__ = ["KContext", "QuadRat", "backend_name", "make_context", "make_quadrat"]
__version__ = "0.1.0"
