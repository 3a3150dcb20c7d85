"""
Seed kernels for the omega test functions.

A kernel is an even function h supported in [-1, 1], decreasing from
h(0) = 1 to h(1) = 0, with analytic first and second derivatives. All
evaluators are vectorised and pure.
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)

_ATOL = 1e-12


def _as_output(u: Any, values: np.ndarray) -> Any:
    return float(values) if np.ndim(u) == 0 else values


class Kernel(ABC):
    """
    Base class for seed kernels.

    Subclasses implement the three ``_inside_*`` hooks for ``0 <= u < 1``.
    Evenness and the support cut-off are applied here, so ``eval(1) == 0``
    and every derivative is 0 at ``|u| >= 1``.
    """

    name: str = "kernel"
    support_radius: float = 1.0

    @abstractmethod
    def _inside(self, u: np.ndarray) -> np.ndarray:
        """h(u) for 0 <= u < 1."""

    @abstractmethod
    def _inside_d1(self, u: np.ndarray) -> np.ndarray:
        """h'(u) for 0 <= u < 1."""

    @abstractmethod
    def _inside_d2(self, u: np.ndarray) -> np.ndarray:
        """h''(u) for 0 <= u < 1."""

    @property
    def edge_slope(self) -> float:
        """One-sided derivative h'(1-)."""
        return float(self._inside_d1(np.asarray(1.0)))

    def eval(self, u: Any) -> Any:
        a = np.abs(np.asarray(u, dtype=float))
        inside = a < 1.0
        values = np.where(inside, self._inside(np.where(inside, a, 0.0)), 0.0)
        return _as_output(u, values)

    def eval_d1(self, u: Any) -> Any:
        arr = np.asarray(u, dtype=float)
        a = np.abs(arr)
        inside = a < 1.0
        slope = self._inside_d1(np.where(inside, a, 0.0))
        values = np.where(inside, np.sign(arr) * slope, 0.0)
        return _as_output(u, values)

    def eval_d2(self, u: Any) -> Any:
        a = np.abs(np.asarray(u, dtype=float))
        inside = a < 1.0
        values = np.where(inside, self._inside_d2(np.where(inside, a, 0.0)), 0.0)
        return _as_output(u, values)

    def eval_d2_closed(self, u: Any) -> Any:
        """h'' on the closed interval [-1, 1], one-sided limits at the ends."""
        a = np.abs(np.asarray(u, dtype=float))
        inside = a <= 1.0
        values = np.where(inside, self._inside_d2(np.where(inside, a, 0.0)), 0.0)
        return _as_output(u, values)

    def __call__(self, u: Any) -> Any:
        return self.eval(u)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


class CosineKernel(Kernel):
    """h(u) = cos(pi u / 2)."""

    name = "cos"

    def _inside(self, u: np.ndarray) -> np.ndarray:
        return np.cos(0.5 * math.pi * u)

    def _inside_d1(self, u: np.ndarray) -> np.ndarray:
        return -0.5 * math.pi * np.sin(0.5 * math.pi * u)

    def _inside_d2(self, u: np.ndarray) -> np.ndarray:
        return -0.25 * math.pi ** 2 * np.cos(0.5 * math.pi * u)


class QuadraticKernel(Kernel):
    """h(u) = 1 - u^2."""

    name = "quadratic"

    def _inside(self, u: np.ndarray) -> np.ndarray:
        return 1.0 - u * u

    def _inside_d1(self, u: np.ndarray) -> np.ndarray:
        return -2.0 * u

    def _inside_d2(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(u, -2.0, dtype=float)


class BiweightKernel(Kernel):
    """h(u) = (1 - u^2)^2, the one shipped kernel with h'(1-) = 0."""

    name = "biweight"

    def _inside(self, u: np.ndarray) -> np.ndarray:
        return (1.0 - u * u) ** 2

    def _inside_d1(self, u: np.ndarray) -> np.ndarray:
        return -4.0 * u * (1.0 - u * u)

    def _inside_d2(self, u: np.ndarray) -> np.ndarray:
        return 12.0 * u * u - 4.0


class FunctionKernel(Kernel):
    """
    Kernel built from caller-supplied callables.

    The callables receive ``|u|`` restricted to ``[0, 1)`` and must be
    vectorised. ``d1`` is the derivative for positive arguments.
    """

    def __init__(
        self,
        name: str,
        h: Callable[[np.ndarray], np.ndarray],
        d1: Callable[[np.ndarray], np.ndarray],
        d2: Callable[[np.ndarray], np.ndarray],
        edge_slope: Optional[float] = None,
    ):
        self.name = name
        self._h = h
        self._d1 = d1
        self._d2 = d2
        self._edge_slope = edge_slope

    def _inside(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self._h(u), dtype=float)

    def _inside_d1(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self._d1(u), dtype=float)

    def _inside_d2(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self._d2(u), dtype=float)

    @property
    def edge_slope(self) -> float:
        if self._edge_slope is not None:
            return float(self._edge_slope)
        return super().edge_slope


def make_cosine_kernel() -> Kernel:
    return CosineKernel()


def make_quadratic_kernel() -> Kernel:
    return QuadraticKernel()


def make_biweight_kernel() -> Kernel:
    return BiweightKernel()


_REGISTRY: Dict[str, Callable[[], Kernel]] = {
    "cos": make_cosine_kernel,
    "cosine": make_cosine_kernel,
    "quadratic": make_quadratic_kernel,
    "biweight": make_biweight_kernel,
}

KERNEL_NAMES = ("cos", "quadratic", "biweight")


def get_kernel(name: str) -> Kernel:
    """
    Look up a shipped kernel by CLI name.

    Raises:
        ValueError: For unknown names
    """
    try:
        return _REGISTRY[name.lower()]()
    except KeyError:
        raise ValueError(
            f"Unknown kernel {name!r}; choose from {', '.join(KERNEL_NAMES)}"
        ) from None


def validate_kernel(k: Kernel, grid_points: int = 1001) -> List[str]:
    """
    Check a kernel against the admissibility contract.

    Args:
        k: Kernel to check
        grid_points: Samples per checked interval (at least 3)

    Returns:
        Human-readable violations; empty when the kernel is admissible
    """
    if grid_points < 3:
        raise ValueError("validate_kernel needs at least 3 grid points")

    violations: List[str] = []
    u = np.linspace(-2.0, 2.0, grid_points)
    h = np.asarray(k.eval(u), dtype=float)

    if not np.all(np.isfinite(h)):
        violations.append("h is not finite on [−2, 2]")
        return violations

    if np.max(np.abs(h - h[::-1])) > _ATOL:
        violations.append("h is not even")

    outside = np.abs(u) > 1.0
    if np.any(np.abs(h[outside]) > _ATOL):
        violations.append("h does not vanish outside [−1, 1]")

    h0 = float(k.eval(0.0))
    if abs(h0 - 1.0) > _ATOL:
        violations.append("h(0) ≠ 1")
    h1 = float(k.eval(1.0))
    if abs(h1) > _ATOL:
        violations.append("h(1) ≠ 0")

    half = np.asarray(k.eval(np.linspace(0.0, 1.0, grid_points)), dtype=float)
    if np.any(np.diff(half) > _ATOL):
        violations.append("h is not non-increasing on [0, 1]")

    interior = np.linspace(-1.0, 1.0, grid_points)[1:-1]
    if not np.all(np.isfinite(np.asarray(k.eval_d2(interior), dtype=float))):
        violations.append("h'' is not finite on (−1, 1)")

    if violations:
        logger.info(f"Kernel {k.name} failed admissibility: {'; '.join(violations)}")
    return violations
