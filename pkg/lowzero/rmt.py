"""
Random-matrix oracle.

Samples Haar-distributed SO(2N) matrices, evaluates the eigenangle
statistic ``D = sum_j phi(theta_j * 2N / (2 pi))`` and compares its mean and
centered moments with ``mean_so_even`` and ``rhs_limit``.

Every sample draws from its own seed sequence ``(seed, index, attempt)``,
so results do not depend on how samples are split between workers.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from lowzero.errors import NumericalError
from lowzero.numerics.moments import MomentEngine, MomentSpec, mean_so_even, rhs_limit
from lowzero.numerics.quad import QuadConfig, integrate_1d
from lowzero.numerics.testfun import TestFunctionPair
from lowzero.utils.logging_utils import get_logger
from lowzero.utils.parallel import map_ordered

logger = get_logger(__name__)

MAX_MOMENT = 6
_CHUNK = 500
_BREAKDOWN = 1e-12


@dataclass(frozen=True)
class RmtConfig:
    """
    Monte-Carlo settings.

    Attributes:
        half_size: N, matrices are 2N x 2N
        samples: Number of matrices M
        seed: Root seed
        blocks: Jackknife blocks
        audit_fraction: Share of samples whose group invariants are checked
        test_mode: Audit every sample
        max_redraws: Redraw budget per sample on orthogonalisation breakdown
    """

    half_size: int = 50
    samples: int = 20000
    seed: int = 7
    blocks: int = 100
    audit_fraction: float = 0.01
    test_mode: bool = False
    max_redraws: int = 8

    def __post_init__(self) -> None:
        if self.half_size < 2:
            raise ValueError(f"half_size must be at least 2, got {self.half_size}")
        if self.samples < 1:
            raise ValueError(f"samples must be at least 1, got {self.samples}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.blocks < 2:
            raise ValueError("blocks must be at least 2")
        if not 0 <= self.audit_fraction <= 1:
            raise ValueError("audit_fraction must lie in [0, 1]")

    @property
    def normalization(self) -> float:
        """Scale making the mean eigenangle spacing 1."""
        return 2 * self.half_size / (2 * math.pi)

    @property
    def audit_stride(self) -> int:
        if self.test_mode or self.audit_fraction >= 1:
            return 1
        if self.audit_fraction <= 0:
            return 0
        return max(1, int(round(1.0 / self.audit_fraction)))

    @classmethod
    def from_config(
        cls, config: Optional[Dict[str, Any]] = None, **overrides: Any
    ) -> "RmtConfig":
        section = dict((config or {}).get("rmt", {}))
        known = set(cls.__dataclass_fields__)
        values = {k: v for k, v in section.items() if k in known}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def draw_so_even(cfg: RmtConfig, index: int) -> Tuple[np.ndarray, int]:
    """
    Haar-distributed matrix in SO(2N) for one sample index.

    A standard Gaussian matrix is orthogonalised by QR with the signs of
    ``diag(R)`` moved into ``Q``. A determinant of -1 is fixed by flipping
    the first row, which maps Haar measure on the other component onto SO.

    Returns:
        Tuple of (matrix, number of redraws used)

    Raises:
        NumericalError: If every redraw breaks down
    """
    size = 2 * cfg.half_size
    for attempt in range(cfg.max_redraws + 1):
        rng = np.random.default_rng([cfg.seed, index, attempt])
        z = rng.standard_normal((size, size))
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        if np.min(np.abs(d)) <= _BREAKDOWN * np.max(np.abs(d)):
            logger.warning(
                f"Sample {index}: singular draw on attempt {attempt}, redrawing"
            )
            continue
        q = q * np.sign(d)
        if np.linalg.det(q) < 0:
            q[0, :] = -q[0, :]
        return q, attempt
    raise NumericalError(
        f"Sample {index}: orthogonalisation broke down {cfg.max_redraws + 1} times"
    )


def eigenangles(q: np.ndarray) -> np.ndarray:
    """Sorted eigenvalue angles in ``(-pi, pi]``."""
    angles = np.angle(np.linalg.eigvals(q))
    angles = np.where(angles <= -math.pi, math.pi, angles)
    return np.sort(angles)


def audit_draw(q: np.ndarray, index: int) -> None:
    """
    Check group membership and spectral pairing of one draw.

    Raises:
        NumericalError: On any violated invariant
    """
    size = q.shape[0]
    if np.max(np.abs(q.T @ q - np.eye(size))) > 1e-10:
        raise NumericalError(f"Sample {index}: matrix is not orthogonal")
    if abs(np.linalg.det(q) - 1.0) > 1e-8:
        raise NumericalError(f"Sample {index}: determinant is not +1")
    eig = np.linalg.eigvals(q)
    if np.max(np.abs(np.abs(eig) - 1.0)) > 1e-8:
        raise NumericalError(f"Sample {index}: eigenvalues leave the unit circle")
    angles = np.sort(np.angle(eig))
    if np.max(np.abs(angles + angles[::-1])) > 1e-8:
        raise NumericalError(f"Sample {index}: eigenangles are not paired")


def sample_so_even(cfg: RmtConfig, index: int) -> np.ndarray:
    """The 2N eigenangles of sample ``index``."""
    q, _ = draw_so_even(cfg, index)
    return eigenangles(q)


def statistic_d(angles: Sequence[float], tf: TestFunctionPair, N: int) -> float:
    """``sum_j phi(theta_j * 2N / (2 pi))`` over all angles."""
    scaled = np.asarray(angles, dtype=float) * (2 * N / (2 * math.pi))
    return math.fsum(np.asarray(tf.phi(scaled), dtype=float))


def _chunk_task(
    task: Tuple[RmtConfig, TestFunctionPair, int, int]
) -> Tuple[np.ndarray, int, int]:
    cfg, tf, start, stop = task
    stride = cfg.audit_stride
    values = np.empty(stop - start)
    redraws = 0
    audited = 0
    for index in range(start, stop):
        q, attempt = draw_so_even(cfg, index)
        redraws += attempt
        if stride and index % stride == 0:
            audit_draw(q, index)
            audited += 1
        values[index - start] = statistic_d(eigenangles(q), tf, cfg.half_size)
    return values, redraws, audited


def sample_statistics(
    cfg: RmtConfig, tf: TestFunctionPair, threads: int = 1
) -> Tuple[np.ndarray, int, int]:
    """
    Statistic values for samples ``0 .. M-1`` in index order.

    Returns:
        Tuple of (values, total redraws, audited samples)
    """
    bounds = list(range(0, cfg.samples, _CHUNK)) + [cfg.samples]
    tasks = [(cfg, tf, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    results = map_ordered(_chunk_task, tasks, threads)
    values = np.concatenate([r[0] for r in results])
    return values, sum(r[1] for r in results), sum(r[2] for r in results)


def _central_from_sums(sums: np.ndarray, max_n: int) -> Tuple[float, Dict[int, float]]:
    # sums[j] = sum of d^j for j = 0..max_n, d taken about a fixed shift.
    count = sums[0]
    raw = sums / count
    mean = raw[1]
    central = {}
    for k in range(2, max_n + 1):
        central[k] = math.fsum(
            math.comb(k, j) * raw[j] * (-mean) ** (k - j) for j in range(k + 1)
        )
    return mean, central


@dataclass
class MomentEstimates:
    """Monte-Carlo mean and centered moments with jackknife standard errors."""

    mean: float
    mean_se: float
    central: Dict[int, float]
    central_se: Dict[int, float]
    samples: int
    redraws: int = 0
    audited: int = 0

    def to_dict(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {"mean": self.mean}
        se: Dict[str, float] = {"mean": self.mean_se}
        for k in sorted(self.central):
            record[f"m{k}"] = self.central[k]
            se[f"m{k}"] = self.central_se[k]
        record["se"] = se
        return record


def jackknife_moments(
    values: np.ndarray, max_n: int, blocks: int
) -> Tuple[float, float, Dict[int, float], Dict[int, float]]:
    """
    Mean and centered moments with delete-one-block jackknife errors.

    Trailing samples that do not fill a block are dropped from the error
    estimate only.
    """
    values = np.asarray(values, dtype=float)
    shift = math.fsum(values) / values.size
    d = values - shift
    powers = np.vstack([d ** j for j in range(max_n + 1)])
    total = np.array([math.fsum(row) for row in powers])
    mean, central = _central_from_sums(total, max_n)
    mean += shift

    blocks = min(blocks, values.size)
    size = values.size // blocks
    block_sums = np.array(
        [
            [math.fsum(row[b * size:(b + 1) * size]) for row in powers]
            for b in range(blocks)
        ]
    )
    used = block_sums.sum(axis=0)
    estimates = []
    for b in range(blocks):
        m, c = _central_from_sums(used - block_sums[b], max_n)
        estimates.append([m] + [c[k] for k in range(2, max_n + 1)])
    est = np.array(estimates)
    squares = np.sum((est - est.mean(axis=0)) ** 2, axis=0)
    spread = np.sqrt((blocks - 1) / blocks * squares)

    central_se = {k: float(spread[k - 1]) for k in range(2, max_n + 1)}
    central = {k: float(v) for k, v in central.items()}
    return float(mean), float(spread[0]), central, central_se


def empirical_moments(
    cfg: RmtConfig, tf: TestFunctionPair, max_n: int, threads: int = 1
) -> MomentEstimates:
    """
    Monte-Carlo mean and centered moments ``2..max_n`` of the statistic.

    Raises:
        ValueError: If ``max_n`` is outside ``1..6``
    """
    if not 1 <= max_n <= MAX_MOMENT:
        raise ValueError(f"max_n must lie in 1..{MAX_MOMENT}, got {max_n}")
    logger.info(
        f"Sampling {cfg.samples} SO({2 * cfg.half_size}) matrices with seed {cfg.seed}"
    )
    values, redraws, audited = sample_statistics(cfg, tf, threads)
    mean, mean_se, central, central_se = jackknife_moments(values, max_n, cfg.blocks)
    if redraws:
        logger.warning(f"{redraws} redraws after orthogonalisation breakdown")
    return MomentEstimates(
        mean, mean_se, central, central_se, cfg.samples, redraws, audited
    )


def finite_n_mean(tf: TestFunctionPair, N: int, cfg: QuadConfig) -> float:
    """
    Exact SO(2N) expectation of the statistic.

    Uses the eigenangle density of SO(2N) in scaled units,
    ``(2N-1)/(2N) + sin((2N-1) pi x / N) / (2N sin(pi x / N))`` on ``[-N, N]``.
    Its gap to ``mean_so_even`` is of order ``phi_hat(0) / (2N)``.
    """
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    m = 2 * N - 1

    def integrand(x: np.ndarray) -> np.ndarray:
        theta = math.pi * np.asarray(x, dtype=float) / N
        s = np.sin(theta)
        small = np.abs(s) < 1e-12
        # sin(m t) / sin(t) -> m at both t = 0 and t = pi for odd m.
        ratio = np.where(small, float(m), np.sin(m * theta) / np.where(small, 1.0, s))
        density = m / (2.0 * N) + ratio / (2.0 * N)
        return np.asarray(tf.phi(x), dtype=float) * density

    value, _ = integrate_1d(integrand, 0.0, float(N), cfg)
    return 2.0 * value


def predicted_moments(
    tf: TestFunctionPair, max_n: int, cfg: QuadConfig, a: Optional[int] = None
) -> Dict[str, float]:
    """Limiting mean and centered moments for the even family."""
    engine = MomentEngine(tf, cfg)
    predicted = {"mean": mean_so_even(tf, cfg)}
    for k in range(2, max_n + 1):
        spec = MomentSpec(
            n=k,
            a=min(a, k) if a else None,
            sign=1,
            sigma=k * tf.hat_support_radius,
        )
        predicted[f"m{k}"] = rhs_limit(spec, tf, cfg, engine=engine)
    return predicted


@dataclass
class RmtCheck:
    settings: Dict[str, Any]
    empirical: Dict[str, Any]
    predicted: Dict[str, float]
    z_scores: Dict[str, float]
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def max_abs_z(self) -> float:
        return max((abs(z) for z in self.z_scores.values()), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def rmt_check(
    cfg: RmtConfig,
    tf: TestFunctionPair,
    max_n: int,
    quad: QuadConfig,
    a: Optional[int] = None,
    threads: int = 1,
) -> RmtCheck:
    """
    Compare Monte-Carlo moments with their predicted values.

    The mean is scored against the exact SO(2N) expectation
    (``finite_n_mean``); its ``N -> infinity`` limit is kept in ``predicted``
    under ``mean_limit``. Centered moments are scored against their limits.
    z-scores are ``(empirical - predicted) / standard error``.
    """
    estimates = empirical_moments(cfg, tf, max_n, threads)
    predicted = predicted_moments(tf, max_n, quad, a)
    finite_mean = finite_n_mean(tf, cfg.half_size, quad)
    predicted["mean_limit"] = predicted["mean"]
    predicted["mean"] = finite_mean
    empirical = estimates.to_dict()
    se = empirical["se"]
    z_scores = {
        key: (empirical[key] - predicted[key]) / se[key] if se[key] > 0 else 0.0
        for key in se
    }
    settings = {
        "half_size": cfg.half_size,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "blocks": cfg.blocks,
        "max_n": max_n,
        "support": tf.hat_support_radius,
        "a": a,
    }
    return RmtCheck(
        settings=settings,
        empirical=empirical,
        predicted=predicted,
        z_scores=z_scores,
        diagnostics={
            "redraws": estimates.redraws,
            "audited": estimates.audited,
            "finite_n_mean": finite_mean,
        },
    )
