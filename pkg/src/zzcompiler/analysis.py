"""Heavy-output, Hellinger, Wilson-score and t-test statistics, plus error-rate fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .noisysim import COHERENT_CHANNELS, STOCHASTIC_CHANNELS, NoiseSpec, OutputDistribution, ideal_distribution, sample

QV_THRESHOLD = 2.0 / 3.0
CERTIFY_CAP = 10**9


def _probs(d) -> np.ndarray:
    if isinstance(d, OutputDistribution):
        return d.probs
    p = np.asarray(d, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("empty distribution")
    return p


def median(p: np.ndarray) -> float:
    """Midpoint of the two central order statistics (all ``2^n`` values, zeros included)."""
    return float(np.median(p))


# --------------------------------------------------------------------------
# heavy outputs


def h_unaware(m) -> float:
    """Mass of outcomes strictly above the measured median."""
    p = _probs(m)
    return float(p[p > median(p)].sum())


def heavy_set(s) -> np.ndarray:
    p = _probs(s)
    return p > median(p)


def h_aware(m, s) -> float:
    """Measured mass on the ideal heavy set ``{q : S(q) > median(S)}``."""
    pm, ps = _probs(m), _probs(s)
    if pm.shape != ps.shape:
        raise ValueError(f"shape mismatch: {pm.shape} vs {ps.shape}")
    return float(pm[heavy_set(ps)].sum())


@dataclass(frozen=True)
class HeavyResult:
    h_u: np.ndarray
    h_a: np.ndarray
    mean_u: float
    mean_a: float
    wilson_lower: float

    @property
    def n_circuits(self) -> int:
        return len(self.h_a)


def heavy_outputs(measured, ideal, z: float = 2.0) -> HeavyResult:
    """Per-circuit ``h_U``/``h_A`` with the Wilson lower bound on mean ``h_A``."""
    if len(measured) != len(ideal):
        raise ValueError("measured and ideal lists differ in length")
    if not measured:
        raise ValueError("no circuits")
    hu = np.array([h_unaware(m) for m in measured])
    ha = np.array([h_aware(m, s) for m, s in zip(measured, ideal)])
    return HeavyResult(hu, ha, float(hu.mean()), float(ha.mean()), wilson_lower(ha.mean(), len(ha), z))


# --------------------------------------------------------------------------
# Hellinger


@dataclass(frozen=True)
class HellingerResult:
    d_h: float
    f_h: float
    i_h: float


def hellinger_infidelity(s, m) -> HellingerResult:
    ps, pm = _probs(s), _probs(m)
    if ps.shape != pm.shape:
        raise ValueError(f"shape mismatch: {ps.shape} vs {pm.shape}")
    d2 = 0.5 * float(np.sum((np.sqrt(ps) - np.sqrt(pm)) ** 2))
    d2 = min(max(d2, 0.0), 1.0)
    f = (1.0 - d2) ** 2
    return HellingerResult(math.sqrt(d2), f, 1.0 - f)


# --------------------------------------------------------------------------
# confidence intervals and certification


def wilson_lower(p_hat: float, n: int, z: float = 2.0) -> float:
    """Lower Wilson score bound with continuity correction, clamped at 0."""
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    if n < 1 or z <= 0:
        raise ValueError("need n >= 1 and z > 0")
    if p_hat == 0.0:
        return 0.0
    disc = z * z - 1.0 / n + 4.0 * n * p_hat * (1.0 - p_hat) + (4.0 * p_hat - 2.0)
    if disc < 0:
        return 0.0
    w = (2.0 * n * p_hat + z * z - z * math.sqrt(disc) - 1.0) / (2.0 * (n + z * z))
    return max(0.0, w)


def circuits_to_certify(
    p_hat: float, threshold: float = QV_THRESHOLD, z: float = 2.0, cap: int = CERTIFY_CAP
) -> int | None:
    """Smallest ``N`` with ``wilson_lower(p_hat, N, z) > threshold``; ``None`` if unreachable."""
    if p_hat <= threshold:
        return None

    def ok(n):
        return wilson_lower(p_hat, n, z) > threshold

    for n in range(1, 1025):
        if ok(n):
            return n
    lo, hi = 1024, 2048
    while not ok(hi):
        if hi >= cap:
            return None
        lo, hi = hi, min(2 * hi, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def running_mean(values, z: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative mean over run order and its Wilson lower band."""
    v = np.asarray(values, dtype=float)
    means = np.cumsum(v) / np.arange(1, v.size + 1)
    lower = np.array([wilson_lower(min(max(m, 0.0), 1.0), i + 1, z) for i, m in enumerate(means)])
    return means, lower


def welch_t(a, b) -> tuple[float, float]:
    """Welch two-sample t statistic and two-sided p-value."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    if va + vb == 0:
        if a.mean() == b.mean():
            return 0.0, 1.0
        raise ZeroDivisionError("both samples have zero variance")
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    dof = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), dof)
    return float(t), float(p)


# --------------------------------------------------------------------------
# angle offloading


OFFLOAD_CATEGORIES = ("none", "already_minimal", "partial", "complete")


def offloading_ratio(theta_bad_before: float, theta_bad_after: float) -> float:
    """``(before - after) / before``; 1 is complete offloading."""
    if theta_bad_before == 0:
        raise ZeroDivisionError("circuit has no angle on the designated pairs")
    return (theta_bad_before - theta_bad_after) / theta_bad_before


def offloading_category(theta_bad_before: float, theta_bad_after: float, atol: float = 1e-9) -> str:
    if theta_bad_before <= atol:
        return "none"
    if theta_bad_after <= atol:
        return "complete"
    if theta_bad_after >= theta_bad_before - atol:
        return "already_minimal"
    return "partial"


# --------------------------------------------------------------------------
# error-rate estimation


@dataclass(frozen=True)
class RateEstimate:
    channel: str
    eps_hat: float
    residual: float
    target: float
    grid: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "eps_hat": self.eps_hat,
            "residual": self.residual,
            "target": self.target,
            "grid": [{"eps": e, "metric": m} for e, m in self.grid],
        }


DEFAULT_STOCHASTIC_GRID = (0.0,) + tuple(np.geomspace(1e-4, 0.3, 12))
DEFAULT_COHERENT_GRID = (0.0,) + tuple(np.geomspace(1e-3, 0.5, 12))


def mean_heavy(circuits, noise: NoiseSpec, shots: int, aware: bool, ideals=None) -> float:
    """Mean simulated ``h_A`` (``aware``) or ``h_U`` over ``circuits``."""
    vals = []
    for i, c in enumerate(circuits):
        m = sample(c, noise, shots, i)
        if aware:
            vals.append(h_aware(m, ideals[i]))
        else:
            vals.append(h_unaware(m))
    return float(np.mean(vals))


def _solve(metric, target: float, grid, tol: float, fit_points: int):
    """Find ``eps`` with ``metric(eps) = target`` for a (noisily) decreasing metric.

    The coarse grid is bisected for a bracket, the bracket is resampled on
    ``fit_points`` equally spaced rates, and a least-squares line through those
    points is inverted.  Fitting rather than root-finding averages over the
    Monte Carlo jitter of individual evaluations.
    """
    grid = sorted(float(e) for e in grid)
    cache: dict[float, float] = {}

    def f(e):
        if e not in cache:
            cache[e] = metric(e)
        return cache[e]

    def points():
        return sorted(cache.items())

    if target >= f(grid[0]) - tol:
        return grid[0], abs(f(grid[0]) - target), points()
    if f(grid[-1]) > target:
        raise ValueError(
            f"target {target:.4f} is outside the reachable range "
            f"[{f(grid[-1]):.4f}, {f(grid[0]):.4f}] of the grid"
        )
    lo, hi = 0, len(grid) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(grid[mid]) > target:
            lo = mid
        else:
            hi = mid
    e0, e1 = grid[lo], grid[hi]
    xs = np.linspace(e0, e1, max(fit_points, 2))
    ys = np.array([f(float(x)) for x in xs])
    slope, icept = np.polyfit(xs, ys, 1)
    if slope < 0:
        eps = (target - icept) / slope
    else:
        eps = e0 + (f(e0) - target) * (e1 - e0) / (f(e0) - f(e1))
    eps = float(min(max(eps, e0), e1))
    return eps, abs(f(eps) - target), points()


def estimate_stochastic_rate(
    measured_h_u: float,
    circuits,
    channel: str = "depolarizing",
    shots: int = 200,
    seed: int = 0,
    grid=DEFAULT_STOCHASTIC_GRID,
    tol: float = 1e-4,
    fit_points: int = 7,
    t_zz: float = 250.0,
    t_1q: float = 10.0,
) -> RateEstimate:
    """Stochastic rate whose simulated mean ``h_U`` matches ``measured_h_u``."""
    if channel not in STOCHASTIC_CHANNELS:
        raise ValueError(f"channel must be one of {STOCHASTIC_CHANNELS}")
    circuits = list(circuits)

    def metric(eps):
        return mean_heavy(circuits, NoiseSpec(channel, eps, {}, t_zz, t_1q, seed), shots, aware=False)

    eps, resid, pts = _solve(metric, measured_h_u, grid, tol, fit_points)
    return RateEstimate(channel, eps, resid, measured_h_u, pts)


def estimate_coherent_rate(
    measured_h_a: float,
    circuits,
    channel: str,
    stochastic: RateEstimate | None = None,
    shots: int = 200,
    seed: int = 0,
    grid=DEFAULT_COHERENT_GRID,
    tol: float = 1e-4,
    fit_points: int = 7,
    t_zz: float = 250.0,
    t_1q: float = 10.0,
) -> RateEstimate:
    """Coherent rate whose simulated mean ``h_A`` matches, with the stochastic rate held fixed."""
    if channel not in COHERENT_CHANNELS:
        raise ValueError(f"channel must be one of {COHERENT_CHANNELS}")
    circuits = list(circuits)
    ideals = [ideal_distribution(c) for c in circuits]
    s_chan = None if stochastic is None else stochastic.channel
    s_eps = 0.0 if stochastic is None else stochastic.eps_hat

    def metric(eps):
        noise = NoiseSpec(s_chan, s_eps, {channel: eps}, t_zz, t_1q, seed)
        return mean_heavy(circuits, noise, shots, aware=True, ideals=ideals)

    eps, resid, pts = _solve(metric, measured_h_a, grid, tol, fit_points)
    return RateEstimate(channel, eps, resid, measured_h_a, pts)


def sweep(circuits, channel: str, rates, shots: int = 200, seed: int = 0, ideals=None) -> list[dict]:
    """Mean ``h_U`` and ``h_A`` over ``circuits`` for each rate of a single channel."""
    circuits = list(circuits)
    if ideals is None:
        ideals = [ideal_distribution(c) for c in circuits]
    rows = []
    for rate in rates:
        if channel in STOCHASTIC_CHANNELS:
            noise = NoiseSpec(channel, float(rate), seed=seed)
        elif channel in COHERENT_CHANNELS:
            noise = NoiseSpec(None, 0.0, {channel: float(rate)}, seed=seed)
        else:
            raise ValueError(f"unknown channel {channel!r}")
        hu, ha = [], []
        for i, c in enumerate(circuits):
            m = sample(c, noise, shots, i)
            hu.append(h_unaware(m))
            ha.append(h_aware(m, ideals[i]))
        rows.append({"rate": float(rate), "mean_h_u": float(np.mean(hu)), "mean_h_a": float(np.mean(ha))})
    return rows
