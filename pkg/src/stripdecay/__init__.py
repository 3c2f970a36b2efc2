"""Strip widths, residue Fourier transforms and decay checks for one-variable functions."""

__version__ = "0.1.0"

from .expr import FunctionClass, classify, eval_complex, eval_real, parse, to_rational, to_text
from .gaussian import GaussianRational
from .poly import CPoly, RationalFn, roots

__all__ = [
    "__version__",
    "CPoly",
    "FunctionClass",
    "GaussianRational",
    "RationalFn",
    "classify",
    "eval_complex",
    "eval_real",
    "parse",
    "roots",
    "to_rational",
    "to_text",
]
