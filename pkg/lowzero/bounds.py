"""
Headline bounds.

This module turns the moment machinery into the published numbers:

1. ``omega_min_closed_form``: the explicit one-level formula for the
   smallest interval guaranteed to hold a normalized zero.
2. ``omega_min_solver``: the odd-level generalisation, solved by an
   ascending scan followed by bisection.
3. ``percent_bound`` / ``percent_table``: upper bounds on the fraction of
   forms with at least ``r`` normalized zeros in ``(-rho, rho)``.
4. ``calibrate_a``: sweep of the S-parameter against one table cell.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from lowzero.errors import NumericalError
from lowzero.numerics.kernels import Kernel, validate_kernel
from lowzero.numerics.moments import (
    MomentEngine,
    MomentSpec,
    big_s,
    mean_so_even,
    rhs_limit,
)
from lowzero.numerics.quad import GridFunction, QuadConfig, convolve_grid, integrate_1d
from lowzero.numerics.testfun import (
    CURVATURES,
    TestFunctionPair,
    make_naive,
    make_omega,
)
from lowzero.utils.logging_utils import get_logger
from lowzero.utils.parallel import map_ordered

logger = get_logger(__name__)

DEFAULT_BRACKET = (0.05, 5.0)
SCAN_POINTS = 64
ROOT_TOLERANCE = 1e-3


@dataclass
class BoundReport:
    """
    Result of an omega_min or percent computation.

    ``value`` is ``None`` when the bound does not apply; ``diagnostics`` then
    says why.
    """

    kind: str
    value: Optional[float]
    inputs: Dict[str, Any]
    applicable: bool
    quad_error: float = 0.0
    provenance: str = "formula"
    support_flag: str = "GRH-proven range"
    diagnostics: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.kind not in ("omega_min", "percent"):
            raise ValueError(f"Unknown report kind {self.kind!r}")
        if self.value is not None:
            if self.kind == "percent" and self.value < 0:
                raise NumericalError(
                    f"Negative percent bound {self.value!r}: "
                    "moment numerator is negative"
                )
            if self.kind == "omega_min" and not self.value > 0:
                raise NumericalError(f"Non-positive omega_min {self.value!r}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _support_flag(sigma: float) -> str:
    return MomentSpec(n=1, sigma=sigma).support_status


def _require_admissible(k: Kernel) -> None:
    violations = validate_kernel(k, 1001)
    if violations:
        raise ValueError(f"Kernel {k.name} is not admissible: {'; '.join(violations)}")


# ---------------------------------------------------------------------------
# One-level closed form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormPieces:
    """
    Integrals entering the one-level formula.

    ``hh = int_0^1 h^2``, ``hh2 = int_0^1 h h''``, ``conv`` and ``conv2`` are the
    double integrals of ``h(u) h(v-u)`` and ``h(u) h''(v-u)`` over
    ``u in [-1, 1]``, ``v in [0, 2/sigma]``; ``edge`` is the boundary
    curvature contribution added to ``conv2`` under the exact convention.
    """

    sigma: float
    hh: float
    hh2: float
    conv: float
    conv2: float
    edge: float
    error: float

    @property
    def numerator(self) -> float:
        return self.sigma * self.hh + self.sigma ** 2 / 4.0 * self.conv

    @property
    def denominator(self) -> float:
        return self.hh2 / self.sigma + (self.conv2 + self.edge) / 4.0


def _double_integrals(k: Kernel, sigma: float, count: int) -> Tuple[float, float]:
    u = np.linspace(-1.0, 1.0, count)
    h = GridFunction(-1.0, 1.0, np.asarray(k.eval(u), dtype=float))
    h2 = GridFunction(-1.0, 1.0, np.asarray(k.eval_d2_closed(u), dtype=float))
    upper = 2.0 / sigma
    return (
        convolve_grid(h, h).integral(0.0, upper),
        convolve_grid(h, h2).integral(0.0, upper),
    )


def closed_form_pieces(
    k: Kernel, sigma: float, cfg: QuadConfig, curvature: str = "interior"
) -> ClosedFormPieces:
    """
    Evaluate the integrals of the one-level formula.

    The double integrals use the convolution route: integrating over ``u``
    first gives ``(h * h)(v)``, which is then integrated over ``v``.
    """
    if curvature not in CURVATURES:
        raise ValueError(f"curvature must be one of {CURVATURES}, got {curvature!r}")
    hh, e1 = integrate_1d(lambda u: np.asarray(k.eval(u)) ** 2, 0.0, 1.0, cfg)
    hh2, e2 = integrate_1d(
        lambda u: np.asarray(k.eval(u)) * np.asarray(k.eval_d2(u)), 0.0, 1.0, cfg
    )

    fine = cfg.grid_points
    conv, conv2 = _double_integrals(k, sigma, fine)
    conv_c, conv2_c = _double_integrals(k, sigma, (fine - 1) // 2 + 1)
    error = e1 + e2 + (abs(conv - conv_c) + abs(conv2 - conv2_c)) / 3.0

    edge = 0.0
    if curvature == "exact" and k.edge_slope != 0.0:
        upper = min(2.0 / sigma - 1.0, 1.0)
        area, e3 = integrate_1d(k.eval, -1.0, upper, cfg)
        edge = -k.edge_slope * area
        error += abs(k.edge_slope) * e3

    return ClosedFormPieces(sigma, hh, hh2, conv, conv2, edge, error)


def omega_min_closed_form(
    k: Kernel, sigma: float, cfg: QuadConfig, curvature: str = "interior"
) -> BoundReport:
    """
    One-level ``omega_min`` from the explicit formula.

    ``omega_min = (-numerator / denominator)^(-1/2) / pi``.

    Args:
        k: Admissible seed kernel
        sigma: Support budget
        cfg: Quadrature settings
        curvature: ``interior`` (the printed formula) or ``exact``

    Returns:
        BoundReport with provenance ``closed-form``; not applicable when the
        ratio is non-positive
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    _require_admissible(k)

    pieces = closed_form_pieces(k, sigma, cfg, curvature)
    inputs = {
        "n": 1,
        "a": 1,
        "sigma": float(sigma),
        "kernel": k.name,
        "curvature": curvature,
    }
    ratio = -pieces.numerator / pieces.denominator if pieces.denominator != 0 else -1.0

    if ratio <= 0:
        return BoundReport(
            kind="omega_min",
            value=None,
            inputs=inputs,
            applicable=False,
            quad_error=pieces.error,
            provenance="closed-form",
            support_flag=_support_flag(sigma),
            diagnostics=[
                f"Ratio {ratio:.6g} is not positive; "
                f"kernel {k.name} cannot give a bound at sigma={sigma:g}"
            ],
        )

    value = ratio ** -0.5 / math.pi
    # omega ~ ratio^(-1/2): half the relative error of the ratio.
    relative = 1.0 / abs(pieces.numerator) + 1.0 / abs(pieces.denominator)
    error = 0.5 * value * pieces.error * relative
    logger.info(f"Closed-form omega_min for {k.name}, sigma={sigma:g}: {value:.8f}")
    return BoundReport(
        kind="omega_min",
        value=value,
        inputs=inputs,
        applicable=True,
        quad_error=error,
        provenance="closed-form",
        support_flag=_support_flag(sigma),
    )


# ---------------------------------------------------------------------------
# Odd-level solver
# ---------------------------------------------------------------------------

def _g_value(
    task: Tuple[Kernel, float, int, int, float, QuadConfig, str]
) -> Tuple[float, float]:
    k, sigma, n, a, omega, cfg, curvature = task
    tf = make_omega(k, sigma, n, omega, cfg, curvature)
    engine = MomentEngine(tf, cfg)
    value = big_s(n, a, tf, cfg, engine=engine) + mean_so_even(tf, cfg) ** n
    return value, engine.quad_error


def omega_objective(
    spec: MomentSpec,
    k: Kernel,
    omega: float,
    cfg: QuadConfig,
    curvature: str = "interior",
) -> float:
    """
    ``G(omega) = S(n, a; phi_omega) + mu(phi_omega)^n``.

    A form with a normalized zero in ``(-omega, omega)`` is guaranteed once
    ``G(omega) > 0``.
    """
    assert spec.a is not None
    return _g_value((k, spec.sigma, spec.n, spec.a, omega, cfg, curvature))[0]


def omega_min_solver(
    spec: MomentSpec,
    k: Kernel,
    cfg: QuadConfig,
    bracket: Tuple[float, float] = DEFAULT_BRACKET,
    scan_points: int = SCAN_POINTS,
    root_tolerance: float = ROOT_TOLERANCE,
    curvature: str = "interior",
    threads: int = 1,
) -> BoundReport:
    """
    Smallest ``omega`` in ``bracket`` with ``G(omega) > 0``.

    The bracket is scanned upwards on ``scan_points`` log-spaced points; the
    first sign change is refined by bisection until the interval is shorter
    than ``root_tolerance``. The upper end of the final interval is returned.

    Args:
        spec: Moment parameters with odd ``n``
        k: Admissible seed kernel
        cfg: Quadrature settings
        bracket: Search interval ``(lo, hi)``
        scan_points: Number of scan points
        root_tolerance: Width at which bisection stops
        curvature: Curvature convention for the omega construction
        threads: Worker cap for the scan

    Returns:
        BoundReport with provenance ``root-solve``

    Raises:
        ValueError: For even ``n``, a bad bracket or an inadmissible kernel
        NumericalError: If ``G`` stays non-positive on the whole bracket
    """
    if spec.n % 2 == 0:
        raise ValueError(
            f"The omega solver needs an odd level, got n={spec.n}: even centered "
            "moments are non-negative and never change sign"
        )
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise ValueError(f"Bracket must satisfy 0 < lo < hi, got ({lo}, {hi})")
    if scan_points < 2:
        raise ValueError("scan_points must be at least 2")
    _require_admissible(k)
    assert spec.a is not None

    def task(omega: float) -> Tuple[Kernel, float, int, int, float, QuadConfig, str]:
        return (k, spec.sigma, spec.n, spec.a, float(omega), cfg, curvature)

    grid = np.geomspace(lo, hi, scan_points)
    diagnostics: List[str] = []
    errors: List[float] = []
    chunk = max(1, threads)
    first = None
    for start in range(0, grid.size, chunk):
        block = grid[start:start + chunk]
        results = map_ordered(_g_value, [task(w) for w in block], threads)
        for offset, (value, error) in enumerate(results):
            errors.append(error)
            logger.debug(f"G({block[offset]:.6g}) = {value:.6g}")
            if value > 0:
                first = start + offset
                break
        if first is not None:
            break

    inputs = {
        "n": spec.n,
        "a": spec.a,
        "sigma": spec.sigma,
        "kernel": k.name,
        "bracket": [lo, hi],
        "curvature": curvature,
    }
    if first is None:
        raise NumericalError(
            f"No bound in range: G(omega) <= 0 on the whole bracket [{lo:g}, {hi:g}] "
            f"for n={spec.n}, a={spec.a}, kernel {k.name}"
        )
    if first == 0:
        diagnostics.append(
            f"G is already positive at the bracket floor {lo:g}; "
            "omega_min may be smaller"
        )
        value = lo
    else:
        left, right = float(grid[first - 1]), float(grid[first])
        while right - left > root_tolerance:
            mid = 0.5 * (left + right)
            g_mid, error = _g_value(task(mid))
            errors.append(error)
            if g_mid > 0:
                right = mid
            else:
                left = mid
        value = right

    logger.info(f"Solver omega_min for n={spec.n}, a={spec.a}, {k.name}: {value:.6f}")
    return BoundReport(
        kind="omega_min",
        value=value,
        inputs=inputs,
        applicable=True,
        quad_error=max(errors) if errors else 0.0,
        provenance="root-solve",
        support_flag=spec.support_status,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Percentage bounds
# ---------------------------------------------------------------------------

def check_percent_args(n: int, r: int) -> None:
    """Reject odd levels and odd or non-positive zero counts."""
    if n % 2:
        raise ValueError(
            f"Percent bounds need an even level, got n={n}: the bound rests on "
            "Markov's inequality for a non-negative even moment"
        )
    if r <= 0 or r % 2:
        raise ValueError(
            f"r must be a positive even number, got r={r}: zeros come in symmetric "
            "pairs about the central point, so r is an even number"
        )


@dataclass(frozen=True)
class LevelMoments:
    """Quantities of one level that do not depend on ``r`` or ``rho``."""

    spec: MomentSpec
    numerator: float
    mu: float
    quad_error: float


def level_moments(
    spec: MomentSpec, cfg: QuadConfig, tf: Optional[TestFunctionPair] = None
) -> Tuple[LevelMoments, TestFunctionPair]:
    """
    Numerator and mean for a level.

    ``tf`` defaults to the naive function with support ``sigma/n``.
    """
    tf = tf or make_naive(spec.sigma / spec.n)
    engine = MomentEngine(tf, cfg)
    numerator = rhs_limit(spec, tf, cfg, engine=engine)
    mu = mean_so_even(tf, cfg)
    return LevelMoments(spec, numerator, mu, engine.quad_error), tf


def _percent_report(
    level: LevelMoments, tf: TestFunctionPair, r: int, rho: float
) -> BoundReport:
    spec = level.spec
    phi_rho = float(tf.phi(rho))
    denominator = r * phi_rho - level.mu
    inputs = {
        "n": spec.n,
        "a": spec.a,
        "sigma": spec.sigma,
        "test_function": tf.kind,
        "support": tf.hat_support_radius,
        "rho": float(rho),
        "r": int(r),
    }
    if denominator <= 0:
        return BoundReport(
            kind="percent",
            value=None,
            inputs=inputs,
            applicable=False,
            quad_error=level.quad_error,
            support_flag=spec.support_status,
            diagnostics=[
                f"N/A: level {spec.n} cannot bound r={r} at rho={rho:g} because "
                f"r*phi(rho) = {r * phi_rho:.6g} does not exceed mu = {level.mu:.6g} "
                f"(needs r >= {level.mu / phi_rho:.4g})"
            ],
        )
    value = level.numerator / denominator ** spec.n
    return BoundReport(
        kind="percent",
        value=value,
        inputs=inputs,
        applicable=True,
        quad_error=level.quad_error / denominator ** spec.n,
        support_flag=spec.support_status,
    )


def percent_bound(
    spec: MomentSpec,
    r: int,
    rho: float,
    cfg: QuadConfig,
    tf: Optional[TestFunctionPair] = None,
) -> BoundReport:
    """
    Upper bound on the fraction of forms with at least ``r`` normalized
    zeros in ``(-rho, rho)``.

    ``(1_{n even}(n-1)!! sigma_phi^n + sign S(n, a; phi)) / (r phi(rho) - mu)^n``.

    Args:
        spec: Moment parameters with even ``n``
        r: Even number of zeros
        rho: Half-width of the interval
        cfg: Quadrature settings
        tf: Test function; defaults to the naive one with support ``sigma/n``

    Returns:
        BoundReport of kind ``percent``
    """
    check_percent_args(spec.n, r)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    level, tf = level_moments(spec, cfg, tf)
    return _percent_report(level, tf, r, rho)


@dataclass
class PercentTable:
    """Percent bounds for several levels over a range of ``r``."""

    rho: float
    levels: List[int]
    r_values: List[int]
    cells: Dict[int, List[BoundReport]]

    def value(self, level: int, r: int) -> Optional[float]:
        return self.cells[level][self.r_values.index(r)].value

    def reports(self) -> List[BoundReport]:
        return [report for level in self.levels for report in self.cells[level]]

    def curve(self, level: int) -> List[Tuple[int, float]]:
        """Applicable ``(r, percent)`` points of one level."""
        return [
            (r, report.value)
            for r, report in zip(self.r_values, self.cells[level])
            if report.value is not None
        ]

    def crossing(self, r: int) -> Optional[int]:
        """Level giving the smallest bound at ``r`` (``None`` if none applies)."""
        best: Optional[Tuple[float, int]] = None
        for level in self.levels:
            value = self.value(level, r)
            if value is not None and (best is None or value < best[0]):
                best = (value, level)
        return best[1] if best else None


def even_range(r_min: int, r_max: int) -> List[int]:
    """Even ``r`` values from ``r_min`` to ``r_max`` inclusive."""
    if r_max < r_min:
        raise ValueError(f"r_max ({r_max}) is below r_min ({r_min})")
    for r in (r_min, r_max):
        check_percent_args(2, r)
    return list(range(r_min, r_max + 1, 2))


def _level_task(
    task: Tuple[int, Optional[int], float, float, Tuple[int, ...], QuadConfig]
) -> List[BoundReport]:
    n, a, sigma, rho, r_values, cfg = task
    spec = MomentSpec(n=n, a=a, sigma=sigma)
    level, tf = level_moments(spec, cfg)
    logger.info(f"Level {n}: numerator {level.numerator:.8g}, mu {level.mu:.8g}")
    return [_percent_report(level, tf, r, rho) for r in r_values]


def percent_table(
    levels: Sequence[int],
    r_values: Sequence[int],
    rho: float,
    cfg: QuadConfig,
    a: Optional[int] = None,
    sigma: float = 2.0,
    threads: int = 1,
) -> PercentTable:
    """
    Percent bounds for every ``(level, r)`` pair.

    Each level uses its naive function with support ``sigma/n``; the moment
    numerator is computed once per level. Levels run in parallel up to
    ``threads`` workers.
    """
    if not levels:
        raise ValueError("percent_table needs at least one level")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    for n in levels:
        for r in r_values:
            check_percent_args(n, r)
    r_tuple = tuple(int(r) for r in r_values)
    tasks = [(int(n), a, float(sigma), float(rho), r_tuple, cfg) for n in levels]
    results = map_ordered(_level_task, tasks, threads)
    return PercentTable(
        rho=float(rho),
        levels=[int(n) for n in levels],
        r_values=[int(r) for r in r_values],
        cells={int(n): cells for n, cells in zip(levels, results)},
    )


# ---------------------------------------------------------------------------
# Published reference values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PublishedTable:
    """Published layout: ``rows[r] = (level 2, level 4, level 6)``, ``None`` for N/A."""

    rho: float
    rows: Dict[int, Tuple[Optional[float], Optional[float], Optional[float]]]
    levels: Tuple[int, ...] = (2, 4, 6)

    @property
    def r_values(self) -> List[int]:
        return sorted(self.rows)

    def value(self, level: int, r: int) -> Optional[float]:
        return self.rows[r][self.levels.index(level)]


PUBLISHED_TABLES: Dict[int, PublishedTable] = {
    1: PublishedTable(
        rho=0.2,
        rows={
            2: (6.651738, None, None),
            4: (0.104108, 2.370419, 2.147231e4),
            6: (0.029617, 0.069998, 0.809927),
            8: (0.013769, 0.011079, 0.022517),
            10: (0.007924, 0.003152, 0.002427),
            12: (0.005142, 0.001213, 4.79813e-4),
            14: (0.003605, 5.612212e-4, 1.340970e-4),
            16: (0.002666, 2.942389e-4, 4.688515e-5),
            18: (0.002052, 1.687747e-4, 1.917773e-5),
            20: (0.001627, 1.036100e-4, 8.809943e-6),
        },
    ),
    2: PublishedTable(
        rho=0.4,
        rows={
            4: (0.665694, 8.334733, 1.744392e3),
            6: (0.111085, 0.145883, 1.585718),
            8: (0.043857, 0.020351, 0.036592),
            10: (0.023310, 0.005469, 0.003680),
            12: (0.014430, 0.002038, 0.000702),
            14: (0.009804, 0.000924, 0.000192),
            16: (0.007093, 0.000475, 6.606784e-5),
            18: (0.005369, 0.000271, 2.673289e-5),
            20: (0.004204, 0.000165, 1.218053e-5),
        },
    ),
    3: PublishedTable(
        rho=0.8,
        rows={
            6: (None, 10.849910, 48.154279),
            16: (None, 0.004235, 2.83230e-4),
            26: (None, 3.541901e-4, 6.716802e-6),
            28: (420.045063, 2.486819e-4, 3.943864e-6),
            30: (20.991406, 1.796948e-4, 2.418466e-6),
            32: (6.651738, 1.330555e-4, 1.538761e-6),
            34: (3.220871, 1.006126e-4, 1.010576e-6),
        },
    ),
}

# (rho, r, level, value) quoted outside the tables.
PUBLISHED_SPOT_CHECKS: Tuple[Tuple[float, int, int, float], ...] = (
    (0.5, 8, 4, 0.0331395),
    (0.5, 8, 6, 0.0534808),
    (0.9, 8, 4, 2.14456),
    (0.9, 8, 6, 0.847282),
)


def published_table(
    which: int, cfg: QuadConfig, a: Optional[int] = None, threads: int = 1
) -> PercentTable:
    """Recompute one published table layout."""
    try:
        layout = PUBLISHED_TABLES[which]
    except KeyError:
        raise ValueError(
            f"Unknown table {which!r}; choose from {sorted(PUBLISHED_TABLES)}"
        ) from None
    return percent_table(
        list(layout.levels), layout.r_values, layout.rho, cfg, a=a, threads=threads
    )


# ---------------------------------------------------------------------------
# Calibration of the S-parameter
# ---------------------------------------------------------------------------

@dataclass
class CalibrationResult:
    """Outcome of sweeping ``a`` over ``1..n`` against one target value."""

    n: int
    r: int
    rho: float
    target: float
    values: Dict[int, Optional[float]]
    matches: List[int]
    chosen: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "r": self.r,
            "rho": self.rho,
            "target": self.target,
            "values": {str(a): v for a, v in self.values.items()},
            "matches": self.matches,
            "chosen": self.chosen,
        }


def calibrate_a(
    n: int,
    r: int,
    rho: float,
    target: float,
    cfg: QuadConfig,
    rel_tol: float = 5e-3,
    sigma: float = 2.0,
) -> CalibrationResult:
    """
    Find the values of ``a`` that reproduce ``target`` at one table cell.

    ``a = n`` is chosen when it matches; otherwise the smallest match.
    """
    check_percent_args(n, r)
    level_tf = make_naive(sigma / n)
    values: Dict[int, Optional[float]] = {}
    matches: List[int] = []
    for a in range(1, n + 1):
        spec = MomentSpec(n=n, a=a, sigma=sigma)
        report = percent_bound(spec, r, rho, cfg, tf=level_tf)
        values[a] = report.value
        if report.value is None:
            continue
        if abs(report.value - target) <= rel_tol * abs(target):
            matches.append(a)
    chosen = n if n in matches else (matches[0] if matches else None)
    if chosen is None:
        logger.warning(
            f"No a in 1..{n} reproduces {target:g} within relative {rel_tol:g}"
        )
    return CalibrationResult(n, r, float(rho), float(target), values, matches, chosen)
