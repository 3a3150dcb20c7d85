"""
Centered-moment quantities for the n-level statistic.

``sigma_phi_sq``, ``big_r``, ``big_s`` and ``rhs_limit`` give the limiting
centered moments of the family statistic; ``mean_so_even`` gives its mean.
``phi^m`` is always the pointwise power.

The l-dimensional outer integrals inside ``big_r`` are reduced to 1-D
integrals against the density of ``|x_2| + ... + |x_{l+1}|``; the inner
x-side integral is tabulated once per power and interpolated.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from lowzero.errors import NumericalError
from lowzero.numerics.quad import (
    GridFunction,
    QuadConfig,
    abs_sum_densities,
    integrate_1d,
    integrate_nd,
    sinc_inner_from_samples,
    truncation_radius,
    x_grid,
)
from lowzero.numerics.testfun import TestFunctionPair, hat_integral
from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)

ROUTES = ("reduction", "tensor")
GRH_SIGMA = 2.0


@dataclass(frozen=True)
class MomentSpec:
    """
    Parameters of a centered moment.

    Attributes:
        n: Moment level
        a: S-parameter, defaults to ``n``
        sign: +1 for the even family, -1 for the odd family
        sigma: Support budget, ``supp(phi_hat)`` in ``(-sigma/n, sigma/n)``
    """

    n: int
    a: Optional[int] = None
    sign: int = 1
    sigma: float = GRH_SIGMA

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"Moment level must be >= 1, got {self.n}")
        if self.a is None:
            object.__setattr__(self, "a", self.n)
        if self.a < 1:
            raise ValueError(f"S-parameter a must be >= 1, got {self.a}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def support_status(self) -> str:
        return "GRH-proven range" if self.sigma <= GRH_SIGMA else "conjectural"


def double_factorial(k: int) -> int:
    """
    Product of the integers from ``k`` down to 1 with the parity of ``k``.

    ``0!! = (-1)!! = 1``.
    """
    if k < -1:
        raise ValueError(f"double factorial undefined for {k}")
    result = 1
    while k > 1:
        result *= k
        k -= 2
    return result


def s_coefficient(n: int, l: int) -> int:
    """``n! / ((n - 2l)! l!)`` in exact integer arithmetic."""
    return math.factorial(n) // (math.factorial(n - 2 * l) * math.factorial(l))


class MomentEngine:
    """
    Caches the pieces shared between ``big_r`` calls on one test function.

    Args:
        tf: Test function pair
        cfg: Quadrature settings
    """

    def __init__(self, tf: TestFunctionPair, cfg: QuadConfig):
        self.tf = tf
        self.cfg = cfg
        self.radius = tf.hat_support_radius
        self.hat = tf.hat_grid(cfg.grid_points)
        self.phi0 = float(tf.phi(0.0))
        self.errors: List[float] = []
        self._densities: List[GridFunction] = []
        self._x: Optional[np.ndarray] = None
        self._phi_x: Optional[np.ndarray] = None
        self._outer: Dict[Tuple[int, int, str], float] = {}
        self._splines: Dict[Tuple[int, int], Callable[[np.ndarray], np.ndarray]] = {}
        self._sigma_sq: Optional[float] = None

    # -- shared pieces ------------------------------------------------------

    @property
    def sigma_sq(self) -> float:
        if self._sigma_sq is None:
            self._sigma_sq, error = _sigma_phi_sq(self.tf, self.cfg)
            self.errors.append(error)
        return self._sigma_sq

    @property
    def quad_error(self) -> float:
        return math.fsum(self.errors)

    def density(self, l: int) -> GridFunction:
        if len(self._densities) < l:
            self._densities = abs_sum_densities(self.hat, l)
        return self._densities[l - 1]

    def _phi_samples(self, p: int) -> Tuple[np.ndarray, np.ndarray]:
        radius = truncation_radius(self.tf.decay, p, self.cfg)
        x = x_grid(radius, self.cfg)
        if self._x is None or self._x.size < x.size:
            self._x = x
            self._phi_x = np.asarray(self.tf.phi(x), dtype=float)
            if not np.all(np.isfinite(self._phi_x)):
                bad = x[np.flatnonzero(~np.isfinite(self._phi_x))[0]]
                raise NumericalError(
                    f"Non-finite test function value at abscissa {float(bad)!r}"
                )
        assert self._phi_x is not None
        return self._x[: x.size], self._phi_x[: x.size]

    def inner(self, p: int, shifts: np.ndarray) -> np.ndarray:
        """x-side integral of ``phi^p sin(2 pi x (1+t)) / (2 pi x)`` for each shift."""
        if p == 0:
            return np.full(len(shifts), 0.5)
        x, values = self._phi_samples(p)
        return sinc_inner_from_samples(values, x, p, shifts)

    def inner_spline(self, p: int, l: int) -> Callable[[np.ndarray], np.ndarray]:
        key = (p, l)
        if key not in self._splines:
            if p == 0:
                self._splines[key] = lambda t: np.full(np.shape(t), 0.5)
            else:
                t = np.linspace(0.0, l * self.radius, self.cfg.inner_points)
                self._splines[key] = CubicSpline(t, self.inner(p, t))
        return self._splines[key]

    # -- the bracket terms of R(m, i) --------------------------------------

    def outer(self, m: int, l: int, route: str = "reduction") -> float:
        """
        ``I_l``: the ``l``-fold outer integral of the inner integral with
        power ``m - l``.
        """
        if route not in ROUTES:
            raise ValueError(f"route must be one of {ROUTES}, got {route!r}")
        p = m - l
        if p < 0:
            raise ValueError(f"Power m - l must be non-negative (m={m}, l={l})")
        key = (m, l, route if l > 0 else "reduction")
        if key in self._outer:
            return self._outer[key]

        if l == 0:
            value = float(self.inner(p, np.zeros(1))[0])
        elif route == "reduction":
            rho = self.density(l)
            spline = self.inner_spline(p, l)
            value = GridFunction(rho.lo, rho.hi, rho.values * spline(rho.x)).integral()
        else:
            value = self._outer_tensor(p, l)

        logger.debug(f"I_{l} (m={m}, {route}) = {value:.10g}")
        self._outer[key] = value
        return value

    def _outer_tensor(self, p: int, l: int) -> float:
        spline = self.inner_spline(p, l)
        phi_hat = self.tf.phi_hat

        def integrand(*xs: np.ndarray) -> np.ndarray:
            weight = np.ones(())
            total = np.zeros(())
            for x in xs:
                weight = weight * phi_hat(x)
                total = total + np.abs(x)
            return weight * spline(total)

        box = [(-self.radius, self.radius)] * l
        value, error = integrate_nd(integrand, box, self.cfg)
        self.errors.append(error)
        return value


def _sigma_phi_sq(tf: TestFunctionPair, cfg: QuadConfig) -> Tuple[float, float]:
    if tf.hat_values is not None:
        grid = tf.hat_values
        values = np.abs(grid.x) * grid.values ** 2
        return 2.0 * GridFunction(grid.lo, grid.hi, values).integral(), 0.0
    value, error = integrate_1d(
        lambda y: y * np.asarray(tf.phi_hat(y), dtype=float) ** 2,
        0.0,
        tf.hat_support_radius,
        cfg,
    )
    return 4.0 * value, 4.0 * error


def sigma_phi_sq(tf: TestFunctionPair, cfg: QuadConfig) -> float:
    """``2 * integral |y| phi_hat(y)^2 dy`` over the support of ``phi_hat``."""
    return _sigma_phi_sq(tf, cfg)[0]


def big_r(
    m: int,
    i: int,
    tf: TestFunctionPair,
    cfg: QuadConfig,
    route: str = "reduction",
    engine: Optional[MomentEngine] = None,
) -> float:
    """
    ``R(m, i; phi)``.

    ``2^(m-1) (-1)^(m+1) sum_{l<i} (-1)^l C(m, l) [-phi(0)^m / 2 + I_l]``.

    Args:
        m: Power (``m >= 1``)
        i: Number of terms; ``i = 0`` gives the empty sum
        tf: Test function pair
        cfg: Quadrature settings
        route: ``reduction`` (density convolution) or ``tensor`` (brute force)
        engine: Shared cache for repeated calls on ``tf``

    Returns:
        Value of ``R(m, i; phi)``

    Raises:
        ValueError: If ``m < 1``, ``i < 0`` or a term would need ``l > m``
    """
    if m < 1:
        raise ValueError(f"R(m, i) needs m >= 1, got m={m}")
    if i < 0:
        raise ValueError(f"R(m, i) needs i >= 0, got i={i}")
    if i == 0:
        return 0.0
    if i - 1 > m:
        raise ValueError(f"R({m}, {i}) would need l = {i - 1} > m = {m}")

    engine = engine or MomentEngine(tf, cfg)
    base = -0.5 * engine.phi0 ** m
    terms = [
        (-1) ** l * math.comb(m, l) * (base + engine.outer(m, l, route))
        for l in range(i)
    ]
    return 2 ** (m - 1) * (-1) ** (m + 1) * math.fsum(terms)


def big_s(
    n: int,
    a: int,
    tf: TestFunctionPair,
    cfg: QuadConfig,
    engine: Optional[MomentEngine] = None,
) -> float:
    """
    ``S(n, a; phi)``.

    ``sum_{l <= (a-1)/2} n!/((n-2l)! l!) R(n-2l, a-2l) (sigma_phi^2 / 2)^l``.
    """
    if n < 1 or a < 1:
        raise ValueError(f"S(n, a) needs n >= 1 and a >= 1, got n={n}, a={a}")
    engine = engine or MomentEngine(tf, cfg)
    half_var = engine.sigma_sq / 2.0 if a >= 3 else 0.0
    terms = [
        s_coefficient(n, l)
        * big_r(n - 2 * l, a - 2 * l, tf, cfg, engine=engine)
        * half_var ** l
        for l in range((a - 1) // 2 + 1)
    ]
    return math.fsum(terms)


def rhs_limit(
    spec: MomentSpec,
    tf: TestFunctionPair,
    cfg: QuadConfig,
    engine: Optional[MomentEngine] = None,
) -> float:
    """
    Limiting n-th centered moment:
    ``1_{n even} (n-1)!! sigma_phi^n + sign * S(n, a; phi)``.
    """
    engine = engine or MomentEngine(tf, cfg)
    assert spec.a is not None
    s_value = big_s(spec.n, spec.a, tf, cfg, engine=engine)
    if spec.n % 2:
        return spec.sign * s_value
    gaussian = double_factorial(spec.n - 1) * engine.sigma_sq ** (spec.n // 2)
    return gaussian + spec.sign * s_value


def mean_so_even(tf: TestFunctionPair, cfg: QuadConfig) -> float:
    """Mean over SO(even): ``phi_hat(0) + integral(phi_hat) / 2``."""
    return float(tf.phi_hat(0.0)) + 0.5 * hat_integral(tf, cfg)
