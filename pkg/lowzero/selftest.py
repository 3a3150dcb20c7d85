"""
Invariant suites behind ``lowzero selftest``.

Each check returns a :class:`CheckResult`; a check that raises counts as a
failure and reports the exception text. The quick suite stays well under a
minute at desk scale; the full suite adds the tensor oracle, the solver and a
small Monte-Carlo run.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from lowzero.bounds import omega_min_closed_form, omega_min_solver, percent_table
from lowzero.numerics.kernels import KERNEL_NAMES, get_kernel, validate_kernel
from lowzero.numerics.moments import MomentEngine, MomentSpec, big_r, sigma_phi_sq
from lowzero.numerics.quad import (
    GridFunction,
    QuadConfig,
    convolve_grid,
    sinc_inner,
    sinc_inner_plancherel,
)
from lowzero.numerics.testfun import hat_integral, make_naive, make_omega
from lowzero.rmt import RmtConfig, empirical_moments, finite_n_mean, sample_statistics
from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


Check = Callable[[QuadConfig, int], Tuple[bool, str]]


def _close(label: str, got: float, want: float, tol: float) -> Tuple[bool, str]:
    detail = f"{label} = {got:.9g} (expected {want:.9g} ± {tol:g})"
    return abs(got - want) <= tol, detail


# ---------------------------------------------------------------------------
# Quick checks
# ---------------------------------------------------------------------------

def check_kernels(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    problems = [
        f"{name}: {v}"
        for name in KERNEL_NAMES
        for v in validate_kernel(get_kernel(name))
    ]
    if problems:
        return False, "; ".join(problems)
    return True, f"{len(KERNEL_NAMES)} kernels admissible"


def check_naive_pair(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    for sigma in (0.5, 1.0, 2.0):
        tf = make_naive(sigma)
        ok, detail = _close(
            f"integral of phi_hat (sigma={sigma:g})",
            hat_integral(tf, cfg),
            float(tf.phi(0.0)),
            1e-6,
        )
        if not ok:
            return ok, detail
        ok, detail = _close(
            f"sigma_phi^2 (sigma={sigma:g})", sigma_phi_sq(tf, cfg), 1.0 / 3.0, 1e-6
        )
        if not ok:
            return ok, detail
    return (
        True,
        "integral of phi_hat = phi(0) and sigma_phi^2 = 1/3 at three supports",
    )


def check_omega_pair(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    omega = 0.25
    tf = make_omega(get_kernel("cos"), 2.0, 1, omega, cfg, curvature="exact")
    radius = tf.hat_support_radius
    outside = np.array([radius, radius + 0.01, 2.0 * radius])
    if np.any(np.asarray(tf.phi_hat(outside)) != 0.0):
        return False, "phi_hat does not vanish outside its support"
    inside = np.linspace(0.0, omega * 0.99, 50)
    beyond = np.linspace(omega * 1.01, 20.0, 400)
    negative_inside = np.any(np.asarray(tf.phi(inside)) < -1e-12)
    positive_beyond = np.any(np.asarray(tf.phi(beyond)) > 1e-12)
    if negative_inside or positive_beyond:
        return False, "phi does not change sign at omega"
    gap = hat_integral(tf, cfg) - float(tf.phi(0.0))
    return _close("integral of phi_hat - phi(0)", gap, 0.0, 1e-5)


def check_convolution(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    box = GridFunction(-0.5, 0.5, np.ones(1001))
    tri = convolve_grid(box, box)
    if not (math.isclose(tri.lo, -1.0) and math.isclose(tri.hi, 1.0)):
        return False, f"box * box lives on [{tri.lo:g}, {tri.hi:g}], expected [-1, 1]"
    ok, detail = _close("(box * box)(0)", tri(0.0), 1.0, 1e-9)
    if not ok:
        return ok, detail
    return _close("integral of box * box", tri.integral(), 1.0, 1e-9)


def check_plancherel(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    tf = make_naive(2.0)
    x_side = sinc_inner(tf.phi, 1, 0.0, cfg, decay=tf.decay)
    y_side = sinc_inner_plancherel(tf.hat_grid(cfg.grid_points), 1, 0.0)
    ok, detail = _close("x-side inner integral", x_side, 0.375, 1e-5)
    if not ok:
        return ok, detail
    return _close("x-side minus Fourier side", x_side - y_side, 0.0, 1e-5)


def check_thread_determinism(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    args = ([2, 4], [4, 6], 0.4, cfg)
    serial = percent_table(*args, threads=1)
    parallel = percent_table(*args, threads=max(2, threads))
    same = all(
        serial.value(level, r) == parallel.value(level, r)
        for level in serial.levels
        for r in serial.r_values
    )
    if not same:
        return False, "table differs between worker counts"
    return True, "table identical for 1 and 2 workers"


def check_closed_form(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    report = omega_min_closed_form(get_kernel("cos"), 2.0, cfg)
    if report.value is None:
        return False, "closed form did not apply"
    return _close("omega_min (cos, sigma=2)", report.value, 0.25, 1e-4)


# ---------------------------------------------------------------------------
# Full-suite checks
# ---------------------------------------------------------------------------

def check_tensor_oracle(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    tf = make_naive(1.0)
    engine = MomentEngine(tf, cfg)
    worst = 0.0
    for m, i in ((2, 2), (3, 2), (2, 3)):
        fast = big_r(m, i, tf, cfg, route="reduction", engine=engine)
        slow = big_r(m, i, tf, cfg, route="tensor", engine=engine)
        worst = max(worst, abs(fast - slow))
    return worst <= 1e-4, f"largest reduction/tensor gap {worst:.2e}"


def check_solver_agreement(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    k = get_kernel("cos")
    closed = omega_min_closed_form(k, 2.0, cfg).value
    solved = omega_min_solver(MomentSpec(n=1, sigma=2.0), k, cfg, threads=threads).value
    if closed is None or solved is None:
        return False, "one of the routes gave no value"
    return _close("solver minus closed form", solved - closed, 0.0, 2e-3)


def check_rmt(cfg: QuadConfig, threads: int) -> Tuple[bool, str]:
    tf = make_naive(1.0)
    audit = RmtConfig(half_size=8, samples=40, seed=11, test_mode=True)
    first, _, audited = sample_statistics(audit, tf, threads)
    second, _, _ = sample_statistics(audit, tf, 1)
    if audited != audit.samples or not np.array_equal(first, second):
        return False, "audit incomplete or sampling not reproducible"
    sampled = RmtConfig(half_size=50, samples=4000, seed=3)
    estimates = empirical_moments(sampled, tf, 1, threads)
    expected = finite_n_mean(tf, sampled.half_size, cfg)
    z = (estimates.mean - expected) / estimates.mean_se
    detail = (
        f"mean {estimates.mean:.5f} ± {estimates.mean_se:.5f} "
        f"vs {expected:.5f} (z = {z:+.2f})"
    )
    return abs(z) <= 4.0, detail


QUICK_CHECKS: List[Tuple[str, Check]] = [
    ("kernel admissibility", check_kernels),
    ("naive Fourier pair", check_naive_pair),
    ("omega support and sign", check_omega_pair),
    ("convolution support", check_convolution),
    ("Plancherel consistency", check_plancherel),
    ("thread determinism", check_thread_determinism),
    ("closed-form omega_min", check_closed_form),
]

FULL_CHECKS: List[Tuple[str, Check]] = QUICK_CHECKS + [
    ("tensor oracle", check_tensor_oracle),
    ("solver agreement", check_solver_agreement),
    ("random-matrix mean", check_rmt),
]


def run_selftest(
    cfg: QuadConfig, full: bool = False, threads: int = 1
) -> List[CheckResult]:
    """
    Run the quick or full suite.

    Args:
        cfg: Quadrature settings
        full: Include the slow oracle checks
        threads: Worker cap for checks that parallelise

    Returns:
        One result per check, in suite order
    """
    results = []
    for name, check in FULL_CHECKS if full else QUICK_CHECKS:
        try:
            passed, detail = check(cfg, threads)
        except Exception as e:
            logger.error(f"Check {name} raised: {e}", exc_info=True)
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        logger.info(f"{name}: {'pass' if passed else 'FAIL'} ({detail})")
        results.append(CheckResult(name, passed, detail))
    return results
