"""
Test-function pairs.

Each :class:`TestFunctionPair` carries an x-side evaluator ``phi`` and its
Fourier transform ``phi_hat`` together with the support radius of
``phi_hat``. The transform convention is
``hat f(y) = integral f(x) e^{-2 pi i x y} dx``.

Two families are built here:

* the naive Fejer function ``phi(x) = sinc(sigma_n x)^2`` with triangular
  transform ``(1/sigma_n)(1 - |y|/sigma_n)``;
* the omega construction, which starts on the Fourier side from
  ``g = f * f`` with ``f(y) = h(2 n y / sigma)`` and sets
  ``phi_hat = g + (2 pi omega)^-2 g''``.

The evaluators are small picklable classes so pairs can be shipped to
worker processes.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from scipy.special import roots_legendre

from lowzero.numerics.kernels import Kernel, validate_kernel
from lowzero.numerics.quad import GridFunction, QuadConfig, convolve_grid, integrate_1d
from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)

KINDS = ("naive", "omega", "custom")
CURVATURES = ("exact", "interior")


@dataclass(frozen=True)
class TestFunctionPair:
    """
    Dual evaluators of an even test function and its transform.

    Attributes:
        phi: x-side map
        phi_hat: y-side map, zero for ``|y| >= hat_support_radius``
        hat_support_radius: Support radius of ``phi_hat``
        kind: ``naive``, ``omega`` or ``custom``
        params: Construction inputs
        decay: Constant ``C`` with ``|phi(x)| <= C / x^2`` for large ``x``
        hat_values: Precomputed grid of ``phi_hat`` if one exists
    """

    __test__ = False  # keep pytest from collecting this class

    phi: Callable[[Any], Any]
    phi_hat: Callable[[Any], Any]
    hat_support_radius: float
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    decay: float = 1.0
    hat_values: Optional[GridFunction] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"Unknown test-function kind {self.kind!r}")
        if self.hat_support_radius <= 0:
            raise ValueError("hat_support_radius must be positive")

    def hat_grid(self, count: int) -> GridFunction:
        """
        Samples of ``phi_hat`` on ``[-radius, radius]``.

        Args:
            count: Odd number of samples (0 is then a node)

        Returns:
            GridFunction of ``phi_hat``
        """
        if count % 2 == 0:
            raise ValueError("hat_grid needs an odd sample count")
        if self.hat_values is not None and self.hat_values.count == count:
            return self.hat_values
        radius = self.hat_support_radius
        return GridFunction.sample(self.phi_hat, -radius, radius, count)


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NaivePhi:
    sigma: float

    def __call__(self, x: Any) -> Any:
        values = np.sinc(self.sigma * np.asarray(x, dtype=float)) ** 2
        return float(values) if np.ndim(x) == 0 else values


@dataclass(frozen=True)
class NaivePhiHat:
    sigma: float

    def __call__(self, y: Any) -> Any:
        a = np.abs(np.asarray(y, dtype=float))
        values = np.where(a < self.sigma, (1.0 - a / self.sigma) / self.sigma, 0.0)
        return float(values) if np.ndim(y) == 0 else values


@dataclass(frozen=True, eq=False)
class GridHat:
    """Interpolated transform that is exactly zero outside the open support."""

    grid: GridFunction
    radius: float

    def __call__(self, y: Any) -> Any:
        arr = np.asarray(y, dtype=float)
        values = np.where(np.abs(arr) < self.radius, self.grid(arr), 0.0)
        return float(values) if np.ndim(y) == 0 else values


@lru_cache(maxsize=8)
def _legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return roots_legendre(nodes)


@dataclass(frozen=True, eq=False)
class KernelTransform:
    """
    ``f_hat(x) = 2 * integral_0^s h(t/s) cos(2 pi x t) dt`` by Gauss-Legendre.
    """

    kernel: Kernel
    half_width: float
    nodes: int

    def __call__(self, x: Any) -> Any:
        t, w = _legendre(self.nodes)
        s = self.half_width
        t = 0.5 * s * (t + 1.0)
        w = 0.5 * s * w
        samples = np.asarray(self.kernel.eval(t / s), dtype=float) * w
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        values = np.empty(arr.shape)
        flat = arr.ravel()
        out = values.ravel()
        # Chunked to bound the size of the cosine matrix.
        for start in range(0, flat.size, 4096):
            chunk = flat[start:start + 4096]
            cosines = np.cos(2.0 * math.pi * np.outer(chunk, t))
            out[start:start + chunk.size] = 2.0 * (cosines @ samples)
        return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


@dataclass(frozen=True, eq=False)
class OmegaPhi:
    """
    ``phi(x) = f_hat(x)^2 (1 - (x/omega)^2)``, minus ``2 c J f_hat(x) cos(2 pi s x)``
    when the boundary curvature is dropped.
    """

    transform: KernelTransform
    omega: float
    boundary: float = 0.0  # c * J; zero for exact curvature

    def __call__(self, x: Any) -> Any:
        arr = np.asarray(x, dtype=float)
        fh = np.asarray(self.transform(arr), dtype=float)
        values = fh * fh * (1.0 - (arr / self.omega) ** 2)
        if self.boundary:
            s = self.transform.half_width
            values = values - 2.0 * self.boundary * fh * np.cos(2.0 * math.pi * s * arr)
        return float(values) if np.ndim(x) == 0 else values


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------

def make_naive(sigma_n: float) -> TestFunctionPair:
    """
    Naive Fejer test function with transform supported in ``(-sigma_n, sigma_n)``.

    Raises:
        ValueError: If ``sigma_n <= 0``
    """
    if not sigma_n > 0:
        raise ValueError(f"sigma_n must be positive, got {sigma_n!r}")
    sigma_n = float(sigma_n)
    return TestFunctionPair(
        phi=NaivePhi(sigma_n),
        phi_hat=NaivePhiHat(sigma_n),
        hat_support_radius=sigma_n,
        kind="naive",
        params={"sigma_n": sigma_n},
        decay=1.0 / (math.pi * sigma_n) ** 2,
    )


def autocorrelation_grids(
    k: Kernel, sigma: float, n: int, cfg: QuadConfig, curvature: str = "exact"
) -> Tuple[GridFunction, GridFunction]:
    """
    Gridded ``g = f * f`` and ``g''`` on ``[-sigma/n, sigma/n]``.

    ``g''`` is ``f * f''`` with the interior second derivative of ``f``. With
    ``curvature="exact"`` the jump of ``f'`` at ``y = +-s`` is added back as
    ``J (f(y - s) + f(y + s))``, ``J = -h'(1-)/s``, which makes it the true
    second derivative of ``g``.

    Args:
        k: Seed kernel
        sigma: Support budget
        n: Level
        cfg: Quadrature settings (``grid_points`` samples on the output grid)
        curvature: ``exact`` or ``interior``

    Returns:
        Tuple ``(g, g2)`` of GridFunctions on the same grid
    """
    if curvature not in CURVATURES:
        raise ValueError(f"curvature must be one of {CURVATURES}, got {curvature!r}")
    s = sigma / (2.0 * n)
    count = (cfg.grid_points - 1) // 2 + 1
    y = np.linspace(-s, s, count)
    f = GridFunction(-s, s, np.asarray(k.eval(y / s), dtype=float))
    # End samples take the interior limit so the trapezoid weights see f''
    # and not the cut-off.
    f2 = GridFunction(-s, s, np.asarray(k.eval_d2_closed(y / s), dtype=float) / (s * s))

    g = convolve_grid(f, f)
    g2 = convolve_grid(f, f2)
    if curvature == "exact" and k.edge_slope != 0.0:
        jump = -k.edge_slope / s
        yy = g.x
        edge = np.asarray(k.eval((yy - s) / s), dtype=float) + np.asarray(
            k.eval((yy + s) / s), dtype=float
        )
        g2 = GridFunction(g2.lo, g2.hi, g2.values + jump * edge)
    logger.debug(
        f"Autocorrelation grids for {k.name}: s={s:g}, {g.count} points, "
        f"step {g.step:.3e}"
    )
    return g, g2


def make_omega(
    k: Kernel,
    sigma: float,
    n: int,
    omega: float,
    cfg: QuadConfig,
    curvature: str = "exact",
) -> TestFunctionPair:
    """
    Omega test function built on the Fourier side.

    ``phi_hat = g + (2 pi omega)^-2 g''`` on a grid, ``phi`` from the closed
    form ``f_hat(x)^2 (1 - (x/omega)^2)`` (plus the boundary term for the
    interior curvature convention).

    Args:
        k: Admissible seed kernel
        sigma: Support budget, ``phi_hat`` lives in ``(-sigma/n, sigma/n)``
        n: Level (``n >= 1``)
        omega: Sign-change point (``omega > 0``)
        cfg: Quadrature settings
        curvature: ``exact`` (default) or ``interior``

    Returns:
        TestFunctionPair of kind ``omega``

    Raises:
        ValueError: For an inadmissible kernel or non-positive parameters
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    violations = validate_kernel(k, 1001)
    if violations:
        raise ValueError(f"Kernel {k.name} is not admissible: {'; '.join(violations)}")

    s = sigma / (2.0 * n)
    radius = 2.0 * s
    c = (2.0 * math.pi * omega) ** -2
    g, g2 = autocorrelation_grids(k, sigma, n, cfg, curvature)
    hat = GridFunction(g.lo, g.hi, g.values + c * g2.values)

    boundary = 0.0
    if curvature == "interior":
        boundary = c * (-k.edge_slope / s)
    phi = OmegaPhi(KernelTransform(k, s, cfg.transform_nodes), float(omega), boundary)

    return TestFunctionPair(
        phi=phi,
        phi_hat=GridHat(hat, radius),
        hat_support_radius=radius,
        kind="omega",
        params={
            "kernel": k.name,
            "sigma": float(sigma),
            "n": int(n),
            "omega": float(omega),
            "curvature": curvature,
        },
        decay=_estimate_decay(phi),
        hat_values=hat,
    )


def _estimate_decay(phi: Callable[[Any], Any]) -> float:
    # |phi| x^2 sampled well past the main lobe, doubled for headroom.
    x = np.linspace(20.0, 40.0, 257)
    return 2.0 * float(np.max(np.abs(np.asarray(phi(x), dtype=float)) * x * x))


def make_custom(
    phi: Callable[[Any], Any],
    phi_hat: Callable[[Any], Any],
    hat_support_radius: float,
    decay: float = 1.0,
    params: Optional[Dict[str, Any]] = None,
) -> TestFunctionPair:
    """Wrap caller-supplied evaluators as a ``custom`` pair."""
    return TestFunctionPair(
        phi=phi,
        phi_hat=phi_hat,
        hat_support_radius=float(hat_support_radius),
        kind="custom",
        params=dict(params or {}),
        decay=float(decay),
    )


def hat_integral(tf: TestFunctionPair, cfg: QuadConfig) -> float:
    """
    Integral of ``phi_hat`` over its support; equals ``phi(0)``.
    """
    if tf.hat_values is not None:
        return tf.hat_values.integral()
    radius = tf.hat_support_radius
    value, _ = integrate_1d(tf.phi_hat, -radius, radius, cfg)
    return value
