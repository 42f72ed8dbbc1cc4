"""Bootstrap similarity test with calibrated trimming level, plus a
Kolmogorov-Smirnov baseline.

The statistic is the scaled W2 distance between optimally trimmed
samples at an inflated level alpha_n; replicates resample from the
pooled trimmed measure at reduced sizes and compare their untrimmed
scaled W2 against the statistic.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import _kernels
from .distmodel import DistSpec, EmpiricalSample, InputError
from .rng import SeedSpec
from .trimming import joint_optimal_trim
from .wasserstein import wp_curves, wp_scalar_laws

_REPLICATE_STREAM_BASE = 1000


@dataclass(frozen=True)
class TestConfig:
    alpha: float
    beta: float = 0.05
    gamma: float = 0.05
    rho: float = 1.0
    replicates: int = 1000
    seed: SeedSpec = field(default_factory=lambda: SeedSpec(0))

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise InputError(f"alpha must be in [0, 1), got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise InputError(f"beta must be in (0, 1), got {self.beta}")
        if not 0.0 < self.gamma < 1.0:
            raise InputError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 < self.rho <= 1.0:
            raise InputError(f"rho must be in (0, 1], got {self.rho}")
        if self.replicates < 1:
            raise InputError("need at least one bootstrap replicate")


@dataclass(frozen=True)
class TestResult:
    p_value: float
    statistic: float
    alpha_n: float
    n: int
    m: int
    n_prime: int
    m_prime: int
    replicates: int
    replicates_exceeding: int
    decision: str  # "reject" | "retain"
    solver: str
    solver_iterations: int
    solver_converged: bool

    def to_dict(self) -> dict:
        return {
            "p_value": self.p_value,
            "statistic": self.statistic,
            "alpha_n": self.alpha_n,
            "n": self.n,
            "m": self.m,
            "n_prime": self.n_prime,
            "m_prime": self.m_prime,
            "replicates": self.replicates,
            "replicates_exceeding": self.replicates_exceeding,
            "decision": self.decision,
            "solver": self.solver,
            "solver_iterations": self.solver_iterations,
            "solver_converged": self.solver_converged,
        }


def calibrated_alpha(alpha: float, gamma: float, n: int, m: int) -> float:
    """alpha + sqrt(alpha(1-alpha)/(n^m)) * ndtri(sqrt(1-gamma)), clamped.

    The inflation keeps the boundary rejection probability below
    beta + gamma.  Negative inflation (gamma near 1) is clamped to zero
    with a warning; the result is always < 1.
    """
    if not 0.0 <= alpha < 1.0:
        raise InputError(f"alpha must be in [0, 1), got {alpha}")
    if not 0.0 < gamma < 1.0:
        raise InputError(f"gamma must be in (0, 1), got {gamma}")
    if alpha == 0.0:
        return 0.0
    bump = math.sqrt(alpha * (1.0 - alpha) / min(n, m)) * float(
        special.ndtri(math.sqrt(1.0 - gamma))
    )
    if bump < 0.0:
        warnings.warn(
            "calibration slack gamma so large the inflation is negative; "
            "clamping the calibrated level at alpha",
            stacklevel=2,
        )
        bump = 0.0
    return min(alpha + bump, 1.0 - 1e-9)


def resampling_sizes(n: int, m: int, rho: float) -> tuple[int, int]:
    """n' = ceil(n^rho), m' = floor(n' m / n), at least one point each."""
    if not 0.0 < rho <= 1.0:
        raise InputError(f"rho must be in (0, 1], got {rho}")
    n_prime = int(math.ceil(n ** rho))
    m_prime = max(int(math.floor(n_prime * m / n)), 1)
    return n_prime, m_prime


def pooled_measure(
    trimmed_p: EmpiricalSample, trimmed_q: EmpiricalSample, n: int, m: int
) -> EmpiricalSample:
    """(n/(n+m)) trimmed_p + (m/(n+m)) trimmed_q on the union of atoms."""
    wp = n / (n + m)
    v = np.concatenate([trimmed_p.values, trimmed_q.values])
    w = np.concatenate([wp * trimmed_p.weights, (1.0 - wp) * trimmed_q.weights])
    order = np.argsort(v, kind="stable")
    v = v[order]
    w = w[order]
    w = w / w.sum()
    return EmpiricalSample(v, w)


def _w2_uniform_sorted(x, y):
    n, m = x.size, y.size
    cx = np.arange(1, n + 1) / n
    cy = np.arange(1, m + 1) / m
    return math.sqrt(max(_kernels.w2sq_steps(x, cx, y, cy), 0.0))


def bootstrap_pvalue(
    x: EmpiricalSample, y: EmpiricalSample, cfg: TestConfig
) -> TestResult:
    """Bootstrap p-value for similarity at level cfg.alpha.

    Replicate b draws n' + m' points from the pooled trimmed measure on
    the derived stream seed.derive(1000 + b); the p-value is the exact
    fraction of replicates whose scaled untrimmed W2 strictly exceeds
    the scaled trimmed statistic.  Rejects when p <= beta.
    """
    n, m = x.size, y.size
    alpha_n = calibrated_alpha(cfg.alpha, cfg.gamma, n, m)
    sol = joint_optimal_trim(
        x, y, alpha_n, solver="convex", seed=cfg.seed.derive(0)
    )
    statistic = math.sqrt(n * m / (n + m)) * sol.distance
    pooled = pooled_measure(sol.trimmed_p, sol.trimmed_q, n, m)
    n_prime, m_prime = resampling_sizes(n, m, cfg.rho)
    scale = math.sqrt(n_prime * m_prime / (n_prime + m_prime))
    pv = pooled.values
    pcw = pooled.cum_weights
    exceeding = 0
    for b in range(cfg.replicates):
        rng = cfg.seed.derive(_REPLICATE_STREAM_BASE + b).generator()
        u = rng.random(n_prime + m_prime)
        idx = np.searchsorted(pcw, u, side="left")
        draws = pv[np.minimum(idx, pv.size - 1)]
        xs = np.sort(draws[:n_prime])
        ys = np.sort(draws[n_prime:])
        if scale * _w2_uniform_sorted(xs, ys) > statistic:
            exceeding += 1
    p_value = exceeding / cfg.replicates
    return TestResult(
        p_value=p_value,
        statistic=statistic,
        alpha_n=alpha_n,
        n=n,
        m=m,
        n_prime=n_prime,
        m_prime=m_prime,
        replicates=cfg.replicates,
        replicates_exceeding=exceeding,
        decision="reject" if p_value <= cfg.beta else "retain",
        solver=sol.solver,
        solver_iterations=sol.iterations,
        solver_converged=sol.converged,
    )


# -- Kolmogorov-Smirnov baseline ---------------------------------------


def ks_statistic(x: EmpiricalSample, y: EmpiricalSample) -> float:
    """Exact sup_t |F_n(t) - G_m(t)| over the merged order statistics."""
    v = np.concatenate([x.values, y.values])
    return float(np.max(np.abs(x.cdf(v) - y.cdf(v))))


_KS_CACHE: dict = {}


def ks_critical_value(
    alpha: float,
    beta: float,
    mc_reps: int = 100_000,
    gridsize: int = 2048,
    seed: SeedSpec | None = None,
) -> float:
    """(1-beta) quantile of sup_{0<=x<=1-a} B1(x+a) - B2(x) by Monte Carlo.

    Bridges are simulated on a uniform grid as cumulated Gaussian
    increments minus t times the terminal value; the shift a is rounded
    to the grid.  At a=0 the law of the sup has tail exp(-t^2), which
    anchors the accuracy of the simulation.
    """
    if not 0.0 <= alpha < 1.0:
        raise InputError(f"alpha must be in [0, 1), got {alpha}")
    if not 0.0 < beta < 1.0:
        raise InputError(f"beta must be in (0, 1), got {beta}")
    seed = seed if seed is not None else SeedSpec(0)
    key = (round(alpha, 12), round(beta, 12), mc_reps, gridsize, seed)
    if key in _KS_CACHE:
        return _KS_CACHE[key]
    shift = int(round(alpha * gridsize))
    sups = np.empty(mc_reps)
    chunk = max(1, min(mc_reps, (1 << 24) // gridsize))
    done = 0
    block = 0
    while done < mc_reps:
        take = min(chunk, mc_reps - done)
        rng = seed.derive(block).generator()
        t = np.arange(1, gridsize + 1) / gridsize
        z1 = rng.standard_normal((take, gridsize)) / math.sqrt(gridsize)
        z2 = rng.standard_normal((take, gridsize)) / math.sqrt(gridsize)
        b1 = np.cumsum(z1, axis=1)
        b1 -= b1[:, -1:] * t
        b2 = np.cumsum(z2, axis=1)
        b2 -= b2[:, -1:] * t
        hi = gridsize - shift
        diff = b1[:, shift:] - b2[:, :hi] if shift else b1 - b2
        sups[done : done + take] = diff.max(axis=1)
        done += take
        block += 1
    val = float(np.quantile(sups, 1.0 - beta))
    _KS_CACHE[key] = val
    return val


def ks_similarity_test(
    x: EmpiricalSample,
    y: EmpiricalSample,
    alpha: float,
    beta: float = 0.05,
    mc_reps: int = 100_000,
    seed: SeedSpec | None = None,
) -> dict:
    """Reject when D_n > alpha + z / sqrt(n); equal sample sizes only."""
    if x.size != y.size:
        raise InputError("the KS similarity test needs equal sample sizes")
    d = ks_statistic(x, y)
    z = ks_critical_value(alpha, beta, mc_reps=mc_reps, seed=seed)
    threshold = alpha + z / math.sqrt(x.size)
    return {
        "statistic": d,
        "critical_value": z,
        "threshold": threshold,
        "decision": "reject" if d > threshold else "retain",
    }


def prop6_bound_check(
    P: DistSpec,
    Q: DistSpec,
    n: int,
    m: int,
    p: float,
    reps: int,
    seed: SeedSpec,
    batches: int = 10,
):
    """Estimate W_p between the laws of the two-sample W_p statistics.

    S draws two fresh P-samples (sizes n, m) and records W_p between
    them; T does the same under Q. Returns (lhs, rhs, se) with lhs the
    estimated W_p between the laws of S and T, rhs = 2 W_p(P, Q), and
    se a batch-split Monte Carlo standard error for lhs.
    """
    if p < 1:
        raise InputError("order p must be >= 1")
    s_vals = np.empty(reps)
    t_vals = np.empty(reps)
    for r in range(reps):
        g = seed.derive(r)
        xp = P.sample(n, g.derive(0)).values
        yp = P.sample(m, g.derive(1)).values
        xq = Q.sample(n, g.derive(2)).values
        yq = Q.sample(m, g.derive(3)).values
        s_vals[r] = wp_scalar_laws(xp, yp, p)
        t_vals[r] = wp_scalar_laws(xq, yq, p)
    lhs = wp_scalar_laws(s_vals, t_vals, p)
    rhs = 2.0 * wp_curves(P, Q, p)
    if batches > 1 and reps >= 2 * batches:
        per = reps // batches
        vals = [
            wp_scalar_laws(
                s_vals[i * per : (i + 1) * per], t_vals[i * per : (i + 1) * per], p
            )
            for i in range(batches)
        ]
        se = float(np.std(vals, ddof=1) / math.sqrt(batches))
    else:
        se = float("nan")
    return lhs, rhs, se
