"""
Quadrature engine.

1-D rules with Richardson error estimates, a tensor-product rule used as a
brute-force oracle, discrete convolution of gridded functions, and the
reduction of the nested sinc integrals to 1-D integrals against the density
of ``|x_2| + ... + |x_{l+1}|``.

All final reductions go through :func:`math.fsum` in a fixed order, so the
numbers are bit-identical between runs.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from lowzero.errors import NumericalError
from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)

RULES = ("midpoint-riemann", "trapezoid", "gauss-legendre")

# Tensor oracle budget: total nodes across all dimensions.
_ND_NODE_BUDGET = 2 ** 22
_ND_MAX_DIM = 4

RealMap = Callable[[Any], Any]


@dataclass(frozen=True)
class QuadConfig:
    """
    Numerical integration settings.

    ``points_per_dim`` is the node count for 1-D rules and the grid size used
    for gridded test-function transforms. The ``x_*`` fields control the
    x-side oscillatory integrals and ``inner_points`` the t-grid on which
    those integrals are tabulated.
    """

    rule: str = "trapezoid"
    points_per_dim: int = 4001
    refinement: int = 1
    tolerance: float = 1e-7
    transform_nodes: int = 256
    x_step: float = 0.015625
    x_radius: float = 50.0
    x_radius_max: float = 400.0
    inner_points: int = 257

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise ValueError(
                f"Unknown quadrature rule {self.rule!r}; expected one of {RULES}"
            )
        if self.points_per_dim < 8:
            raise ValueError("points_per_dim must be at least 8")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.refinement < 0:
            raise ValueError("refinement must be non-negative")
        if self.x_step <= 0 or self.x_radius <= 0 or self.x_radius_max < self.x_radius:
            raise ValueError(
                "x_step and x_radius must be positive with x_radius <= x_radius_max"
            )
        if self.inner_points < 4 or self.transform_nodes < 2:
            raise ValueError("inner_points must be >= 4 and transform_nodes >= 2")

    @classmethod
    def from_config(
        cls, config: Optional[Dict[str, Any]] = None, **overrides: Any
    ) -> "QuadConfig":
        """
        Build from the ``quadrature`` section of a loaded configuration.

        Args:
            config: Full configuration dict (or ``None`` for defaults)
            **overrides: Field values that win over the config (``None`` is ignored)

        Returns:
            QuadConfig instance
        """
        section = dict((config or {}).get("quadrature", {}))
        known = {f for f in cls.__dataclass_fields__}
        values = {k: v for k, v in section.items() if k in known}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_points(self, points: int) -> "QuadConfig":
        return replace(self, points_per_dim=points)

    @property
    def grid_points(self) -> int:
        """Odd grid size so symmetric grids contain 0 as a node."""
        return self.points_per_dim | 1


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Uniform samples of a real function on ``[lo, hi]``."""

    lo: float
    hi: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("GridFunction needs at least two samples")
        if not self.hi > self.lo:
            raise ValueError(f"Empty interval [{self.lo}, {self.hi}]")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            where = self.lo + bad * (self.hi - self.lo) / (values.size - 1)
            raise NumericalError(f"Non-finite grid value at x = {where!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))

    @classmethod
    def sample(cls, func: RealMap, lo: float, hi: float, count: int) -> "GridFunction":
        x = np.linspace(lo, hi, count)
        return cls(lo, hi, _evaluate(func, x))

    @classmethod
    def zeros(cls, lo: float, hi: float, count: int) -> "GridFunction":
        return cls(lo, hi, np.zeros(count))

    @property
    def count(self) -> int:
        return int(self.values.size)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def __call__(self, y: Any) -> Any:
        """Linear interpolation inside the interval, zero outside."""
        result = np.interp(y, self.x, self.values, left=0.0, right=0.0)
        return float(result) if np.ndim(result) == 0 else result

    def scaled(self, factor: float) -> "GridFunction":
        return GridFunction(self.lo, self.hi, self.values * factor)

    def integral(self, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
        """
        Trapezoid integral over ``[lo, hi]`` (defaults to the whole grid).

        Limits outside the grid are clipped; limits between nodes use the
        linearly interpolated value.
        """
        a = self.lo if lo is None else max(float(lo), self.lo)
        b = self.hi if hi is None else min(float(hi), self.hi)
        if b <= a:
            return 0.0
        x = self.x
        inner = (x > a) & (x < b)
        xs = np.concatenate(([a], x[inner], [b]))
        ys = np.concatenate(([self(a)], self.values[inner], [self(b)]))
        return math.fsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))


def _evaluate(func: RealMap, x: np.ndarray) -> np.ndarray:
    """Evaluate a vectorised map, broadcasting constant results."""
    values = np.asarray(func(x), dtype=float)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape).astype(float)
    return values


def _check_finite(values: np.ndarray, x: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = x[np.flatnonzero(bad)[0]]
        raise NumericalError(f"Non-finite integrand value at abscissa {float(where)!r}")


def rule_nodes(
    rule: str, lo: float, hi: float, count: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of a 1-D rule on ``[lo, hi]``.

    ``count`` is the number of nodes (trapezoid, Gauss-Legendre) or of
    sub-intervals (midpoint-riemann, one node per sub-interval).
    """
    if rule == "trapezoid":
        x = np.linspace(lo, hi, count)
        w = np.full(count, (hi - lo) / (count - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
    elif rule == "midpoint-riemann":
        h = (hi - lo) / count
        x = lo + (np.arange(count) + 0.5) * h
        w = np.full(count, h)
    elif rule == "gauss-legendre":
        t, wt = roots_legendre(count)
        half = 0.5 * (hi - lo)
        x = half * t + 0.5 * (hi + lo)
        w = half * wt
    else:
        raise ValueError(f"Unknown quadrature rule {rule!r}")
    return x, w


def _refine(rule: str, count: int) -> int:
    return 2 * count - 1 if rule == "trapezoid" else 2 * count


def _coarsen(rule: str, count: int) -> int:
    if rule == "trapezoid":
        return max(2, (count - 1) // 2 + 1)
    return max(1, count // 2)


def _error_scale(rule: str) -> float:
    # Order-2 rules: Richardson factor 1/(2^2 - 1).
    return 1.0 if rule == "gauss-legendre" else 1.0 / 3.0


def integrate_1d(
    f: RealMap, lo: float, hi: float, cfg: QuadConfig
) -> Tuple[float, float]:
    """
    Integrate ``f`` over ``[lo, hi]``.

    The rule is applied at ``points_per_dim`` nodes and then refined
    ``refinement`` times; the error estimate compares the last two levels.

    Args:
        f: Vectorised real map
        lo: Lower limit
        hi: Upper limit (must exceed ``lo``)
        cfg: Quadrature settings

    Returns:
        Tuple of (value, error estimate)

    Raises:
        ValueError: If ``lo >= hi``
        NumericalError: If ``f`` returns a non-finite sample
    """
    if not hi > lo:
        raise ValueError(f"integrate_1d needs lo < hi, got [{lo}, {hi}]")

    counts = [cfg.points_per_dim]
    for _ in range(cfg.refinement):
        counts.append(_refine(cfg.rule, counts[-1]))
    if len(counts) == 1:
        counts.insert(0, _coarsen(cfg.rule, counts[0]))

    estimates = []
    for count in counts:
        x, w = rule_nodes(cfg.rule, lo, hi, count)
        values = _evaluate(f, x)
        _check_finite(values, x)
        estimates.append(math.fsum(w * values))

    value = estimates[-1]
    error = abs(estimates[-1] - estimates[-2]) * _error_scale(cfg.rule)
    return value, error


def _nd_count(rule: str, points: int, dim: int) -> int:
    count = min(points, int(round(_ND_NODE_BUDGET ** (1.0 / dim))))
    if rule == "trapezoid" and count % 2 == 0:
        count -= 1
    return max(count, 3)


def _tensor_sum(
    f: Callable[..., Any], box: Sequence[Tuple[float, float]], rule: str, count: int
) -> float:
    axes = [rule_nodes(rule, lo, hi, count) for lo, hi in box]
    mesh = np.meshgrid(*[x for x, _ in axes], indexing="ij", sparse=True)
    values = np.asarray(f(*mesh), dtype=float)
    shape = tuple(count for _ in box)
    values = np.broadcast_to(values, shape)
    if not np.all(np.isfinite(values)):
        idx = np.unravel_index(int(np.flatnonzero(~np.isfinite(values))[0]), shape)
        point = tuple(float(axes[d][0][i]) for d, i in enumerate(idx))
        raise NumericalError(f"Non-finite integrand value at abscissa {point!r}")
    weights = axes[0][1]
    for _, w in axes[1:]:
        weights = np.multiply.outer(weights, w)
    return math.fsum((weights * values).ravel())


def integrate_nd(
    f: Callable[..., Any], box: Sequence[Tuple[float, float]], cfg: QuadConfig
) -> Tuple[float, float]:
    """
    Tensor-product integral of ``f`` over a box of at most four dimensions.

    ``f`` is called once with ``d`` broadcastable coordinate arrays. The
    per-axis node count is ``points_per_dim`` capped by a total node budget.
    This is an oracle for cross-checks, not a production path.

    Args:
        f: Map called as ``f(x1, ..., xd)`` on broadcastable arrays
        box: ``d`` intervals ``(lo, hi)``
        cfg: Quadrature settings

    Returns:
        Tuple of (value, error estimate from a half-resolution pass)

    Raises:
        ValueError: If the box is empty, degenerate, or has more than four axes
    """
    dim = len(box)
    if dim == 0:
        raise ValueError("integrate_nd needs at least one dimension")
    if dim > _ND_MAX_DIM:
        raise ValueError(
            f"integrate_nd is limited to {_ND_MAX_DIM} dimensions, got {dim}"
        )
    for lo, hi in box:
        if not hi > lo:
            raise ValueError(f"Degenerate box interval [{lo}, {hi}]")

    count = _nd_count(cfg.rule, cfg.points_per_dim, dim)
    logger.debug(f"Tensor rule: {dim}-D, {count} nodes per axis")
    fine = _tensor_sum(f, box, cfg.rule, count)
    coarse = _tensor_sum(f, box, cfg.rule, _coarsen(cfg.rule, count))
    return fine, abs(fine - coarse) * _error_scale(cfg.rule)


def convolve_grid(a: GridFunction, b: GridFunction) -> GridFunction:
    """
    Trapezoid-rule convolution ``(a * b)(x) = integral of a(t) b(x - t) dt``.

    The result lives on ``[a.lo + b.lo, a.hi + b.hi]`` with the shared step,
    so supports add.

    Raises:
        ValueError: If the two grids have different steps
    """
    if not math.isclose(a.step, b.step, rel_tol=1e-9, abs_tol=0.0):
        raise ValueError(f"Mismatched grid steps: {a.step!r} vs {b.step!r}")
    h = a.step
    av, bv = a.values, b.values
    na, nb = av.size, bv.size
    raw = np.convolve(av, bv)

    # Trapezoid end weights: the first and last overlapping products count half.
    k = np.arange(na + nb - 1)
    jmin = np.maximum(0, k - (nb - 1))
    jmax = np.minimum(na - 1, k)
    correction = 0.5 * (av[jmin] * bv[k - jmin] + av[jmax] * bv[k - jmax])
    return GridFunction(a.lo + b.lo, a.hi + b.hi, (raw - correction) * h)


def _fold(hat: GridFunction) -> GridFunction:
    symmetric = math.isclose(hat.lo, -hat.hi, rel_tol=1e-12, abs_tol=1e-15)
    if not symmetric or hat.count % 2 == 0:
        raise ValueError("abs_sum_density needs an odd-sized grid symmetric about 0")
    mid = hat.count // 2
    return GridFunction(0.0, hat.hi, 2.0 * hat.values[mid:])


def abs_sum_density(hat: GridFunction, l: int) -> GridFunction:
    """
    Density of ``|x_2| + ... + |x_{l+1}|`` weighted by ``hat``.

    For an even ``hat`` on ``[-s, s]``, returns ``rho_l`` on ``[0, l*s]`` with
    ``rho_1 = 2*hat`` on ``[0, s]`` and ``rho_l = rho_{l-1} * rho_1``.

    Raises:
        ValueError: If ``l < 1`` or the grid is not symmetric
    """
    return abs_sum_densities(hat, l)[-1]


def abs_sum_densities(hat: GridFunction, l_max: int) -> List[GridFunction]:
    """All densities ``rho_1 .. rho_{l_max}``, sharing the convolutions."""
    if l_max < 1:
        raise ValueError(
            "abs_sum_density is defined for l >= 1; "
            "handle the empty product separately"
        )
    rho1 = _fold(hat)
    densities = [rho1]
    for _ in range(1, l_max):
        densities.append(convolve_grid(densities[-1], rho1))
    return densities


# ---------------------------------------------------------------------------
# Oscillatory inner integrals
# ---------------------------------------------------------------------------

def truncation_radius(decay: float, p: int, cfg: QuadConfig) -> float:
    """
    x-side radius for the integral of ``phi^p sin(2 pi x (1+t)) / (2 pi x)``.

    With ``|phi(x)| <= decay / x^2`` the oscillating tail beyond ``X`` is at
    most ``decay^p / (pi^2 X^(2p+1))``; the radius makes that fall below the
    tolerance, clipped to ``[x_radius, x_radius_max]``.
    """
    if decay <= 0:
        return cfg.x_radius
    wanted = (decay ** p / (math.pi ** 2 * cfg.tolerance)) ** (1.0 / (2 * p + 1))
    if wanted > cfg.x_radius_max:
        logger.warning(
            f"Truncation radius {wanted:.1f} for power {p} "
            f"capped at {cfg.x_radius_max:.1f}; "
            f"tail may exceed tolerance {cfg.tolerance:g}"
        )
        return cfg.x_radius_max
    return max(cfg.x_radius, wanted)


def x_grid(radius: float, cfg: QuadConfig) -> np.ndarray:
    """Half-line grid ``0, h, 2h, ...`` covering ``[0, radius]``."""
    steps = int(math.ceil(radius / cfg.x_step))
    return np.arange(steps + 1) * cfg.x_step


def sinc_inner_from_samples(
    phi_values: np.ndarray, x: np.ndarray, p: int, shifts: Sequence[float]
) -> np.ndarray:
    """
    Evaluate the even x-side integral from samples of ``phi`` on ``x``.

    ``x`` must be the grid produced by :func:`x_grid`. The integrand is even,
    so the full-line trapezoid is twice the half-line one with the node at 0
    counted once.
    """
    h = x[1] - x[0]
    powered = phi_values ** p if p > 0 else np.ones_like(phi_values)
    weights = np.full(x.size, 2.0 * h)
    weights[0] = h
    weights[-1] = h
    out = np.empty(len(shifts))
    for i, t in enumerate(shifts):
        freq = 1.0 + float(t)
        # sin(2 pi x f) / (2 pi x) == f * sinc(2 x f)
        kernel = freq * np.sinc(2.0 * x * freq)
        out[i] = math.fsum(weights * powered * kernel)
    return out


def sinc_inner_table(
    phi: RealMap,
    p: int,
    shifts: Sequence[float],
    cfg: QuadConfig,
    decay: float = 1.0,
) -> np.ndarray:
    """
    :func:`sinc_inner` for many shifts sharing one x-grid.

    Args:
        phi: x-side test function
        p: Power of ``phi`` (``p >= 1``)
        shifts: Non-negative shifts ``t``
        cfg: Quadrature settings
        decay: Constant ``C`` with ``|phi(x)| <= C / x^2``

    Returns:
        Array of integral values, one per shift
    """
    if p < 1:
        raise ValueError("sinc_inner needs p >= 1")
    x = x_grid(truncation_radius(decay, p, cfg), cfg)
    values = _evaluate(phi, x)
    _check_finite(values, x)
    return sinc_inner_from_samples(values, x, p, shifts)


def sinc_inner(
    phi: RealMap, p: int, shift: float, cfg: QuadConfig, decay: float = 1.0
) -> float:
    """
    Integral over the real line of ``phi(x)^p sin(2 pi x (1+shift)) / (2 pi x)``.

    The integrand at 0 is ``phi(0)^p (1+shift)`` by continuity.

    Args:
        phi: Even, decaying x-side test function
        p: Power of ``phi`` (``p >= 1``)
        shift: Non-negative shift
        cfg: Quadrature settings
        decay: Constant ``C`` with ``|phi(x)| <= C / x^2``

    Returns:
        Value of the integral
    """
    if shift < 0:
        raise ValueError("sinc_inner needs shift >= 0")
    return float(sinc_inner_table(phi, p, [shift], cfg, decay)[0])


def sinc_inner_plancherel(hat: GridFunction, p: int, shift: float) -> float:
    """
    Fourier-side value of :func:`sinc_inner`.

    Half the integral of the ``p``-fold self-convolution of ``hat`` over
    ``[-(1+shift), 1+shift]``.
    """
    if p < 1:
        raise ValueError("sinc_inner needs p >= 1")
    power = hat
    for _ in range(1, p):
        power = convolve_grid(power, hat)
    edge = 1.0 + shift
    return 0.5 * power.integral(-edge, edge)
