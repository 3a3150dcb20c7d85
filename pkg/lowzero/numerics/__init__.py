"""
Numerical building blocks for lowzero.

Seed kernels, quadrature rules, test-function pairs and the
centered-moment formulas built from them.
"""

from lowzero.numerics.kernels import Kernel, get_kernel, validate_kernel
from lowzero.numerics.moments import MomentEngine, MomentSpec
from lowzero.numerics.quad import GridFunction, QuadConfig
from lowzero.numerics.testfun import (
    TestFunctionPair,
    make_custom,
    make_naive,
    make_omega,
)

__all__ = [
    "GridFunction",
    "Kernel",
    "MomentEngine",
    "MomentSpec",
    "QuadConfig",
    "TestFunctionPair",
    "get_kernel",
    "make_custom",
    "make_naive",
    "make_omega",
    "validate_kernel",
]
