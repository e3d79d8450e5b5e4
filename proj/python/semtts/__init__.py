"""Semantic token extraction, fusion and speech evaluation kernels."""

from ._semtts import *  # noqa: F401,F403
from ._semtts import SemttsError, ShapeError, DegenerateInputError  # noqa: F401

__version__ = "0.1.0"
