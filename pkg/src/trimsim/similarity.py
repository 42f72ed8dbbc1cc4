"""Population similarity quantities: total variation distance, the
core/contamination decomposition, and minimal similarity levels.

Two laws are alpha-similar when each is a mixture (1-eps)*P0 + eps*P_i'
with the same core P0 and eps <= alpha; this holds exactly when their
total variation distance is at most alpha.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .distmodel import DistSpec, EmpiricalSample, InputError
from .rng import SeedSpec

_TV_ABS_TOL = 5e-5
_GRID = 4096


class DegenerateDecomposition(ValueError):
    """Decomposition undefined: laws identical (eps=0) or disjoint (eps=1)."""


def _union_support(P: DistSpec, Q: DistSpec, tail: float = 1e-7):
    lo_p, hi_p = P.support(tail)
    lo_q, hi_q = Q.support(tail)
    return min(lo_p, lo_q), max(hi_p, hi_q)


def _breakpoints(P: DistSpec, Q: DistSpec, lo: float, hi: float):
    """Component centers and uniform edges, so quadrature panels are smooth."""
    pts = [lo, hi]
    for spec in (P, Q):
        for c in spec.components:
            if c.kind == "normal":
                pts.append(c.params[0])
            else:
                pts.extend(c.params)
    pts = sorted(p for p in set(pts) if lo <= p <= hi)
    return pts


def tv_distance(P: DistSpec, Q: DistSpec) -> float:
    """1 - integral of min(f, g) over the union of effective supports."""
    if P == Q:
        return 0.0
    lo, hi = _union_support(P, Q)
    pts = _breakpoints(P, Q, lo, hi)
    total = 0.0
    residual = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, err = integrate.quad(
            lambda x: float(np.minimum(P.density(x), Q.density(x))),
            a,
            b,
            epsabs=_TV_ABS_TOL / max(len(pts) - 1, 1),
            epsrel=1e-9,
            limit=200,
        )
        total += val
        residual += abs(err)
    if not np.isfinite(total) or residual > 10 * _TV_ABS_TOL:
        raise ArithmeticError(
            f"total-variation quadrature failed (residual {residual:.2e})"
        )
    return float(min(max(1.0 - total, 0.0), 1.0))


def is_similar(P: DistSpec, Q: DistSpec, alpha: float, verbose: bool = False):
    """True when d_TV(P, Q) <= alpha.

    With verbose=True also returns the distance and a flag marking
    margins below 1e-4, where the quadrature tolerance matters.
    """
    if not 0.0 <= alpha < 1.0:
        raise InputError(f"similarity level must be in [0, 1), got {alpha}")
    d = tv_distance(P, Q)
    ok = d <= alpha
    if verbose:
        return ok, d, abs(d - alpha) < 1e-4
    return ok


@dataclass(frozen=True)
class GriddedDensity:
    """Density tabulated on a uniform grid with interpolated cdf/quantile."""

    x: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, float)
        f = np.maximum(np.asarray(self.f, float), 0.0)
        if x.shape != f.shape or x.ndim != 1 or x.size < 2:
            raise InputError("grid and density must be matching 1-d arrays")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "f", f)

    @property
    def _cdf_grid(self):
        c = np.concatenate(
            [[0.0], integrate.cumulative_trapezoid(self.f, self.x)]
        )
        total = c[-1]
        if total <= 0:
            raise InputError("density integrates to zero")
        return c / total

    def mass(self) -> float:
        return float(np.trapezoid(self.f, self.x))

    def density(self, x):
        return np.interp(np.asarray(x, float), self.x, self.f, left=0.0, right=0.0)

    def cdf(self, x):
        return np.interp(np.asarray(x, float), self.x, self._cdf_grid)

    def quantile(self, t):
        t = np.asarray(t, float)
        if np.any((t <= 0.0) | (t >= 1.0)):
            raise InputError("quantile defined for t in (0, 1)")
        c = self._cdf_grid
        # strictly increasing envelope so interp inverts cleanly
        c = np.maximum.accumulate(c + np.arange(c.size) * 1e-15)
        return np.interp(t, c, self.x)

    def sample(self, n: int, seed: SeedSpec) -> EmpiricalSample:
        rng = seed.generator()
        u = np.clip(rng.random(n), 1e-12, 1.0 - 1e-12)
        v = np.sort(np.asarray(self.quantile(u), float))
        return EmpiricalSample(v, np.full(n, 1.0 / n))


@dataclass(frozen=True)
class CanonicalDecomposition:
    """P = (1-eps) core + eps contam_p, Q = (1-eps) core + eps contam_q."""

    epsilon: float
    core: GriddedDensity
    contam_p: GriddedDensity
    contam_q: GriddedDensity


def canonical_decomposition(
    P: DistSpec, Q: DistSpec, gridsize: int = _GRID
) -> CanonicalDecomposition:
    """Split both laws into a shared core and mass-eps contaminations,
    with eps equal to the total variation distance."""
    eps = tv_distance(P, Q)
    if eps <= _TV_ABS_TOL:
        raise DegenerateDecomposition(
            "eps = 0: the laws coincide, there is no contamination part"
        )
    if eps >= 1.0 - _TV_ABS_TOL:
        raise DegenerateDecomposition(
            "eps = 1: the laws are mutually singular, there is no common core"
        )
    lo, hi = _union_support(P, Q)
    x = np.linspace(lo, hi, gridsize)
    f = np.asarray(P.density(x), float)
    g = np.asarray(Q.density(x), float)
    m = np.minimum(f, g)
    core = GriddedDensity(x, m / (1.0 - eps))
    contam_p = GriddedDensity(x, (f - m) / eps)
    contam_q = GriddedDensity(x, (g - m) / eps)
    return CanonicalDecomposition(eps, core, contam_p, contam_q)


def epsilon_for_tv(base: DistSpec, contam: DistSpec, nu: float) -> float:
    """Mixing weight eps with d_TV(base, (1-eps) base + eps contam) = nu.

    The mixture identity d_TV(P, (1-eps)P + eps C) = eps * d_TV(P, C)
    makes this a single division.
    """
    if not 0.0 <= nu < 1.0:
        raise InputError(f"target distance must be in [0, 1), got {nu}")
    if nu == 0.0:
        return 0.0
    d = tv_distance(base, contam)
    if d <= 0.0:
        raise InputError("base and contaminating law coincide; any eps gives 0")
    eps = nu / d
    if eps > 1.0:
        raise InputError(
            f"target distance {nu} unreachable: d_TV(base, contam) = {d:.4f}"
        )
    return float(eps)


def contaminated(base: DistSpec, contam: DistSpec, eps: float) -> DistSpec:
    """(1-eps) base + eps contam as a flat mixture spec."""
    if not 0.0 <= eps <= 1.0:
        raise InputError(f"mixing weight must be in [0, 1], got {eps}")
    comps = [
        type(c)(c.kind, c.params, c.weight * (1.0 - eps)) for c in base.components
    ] + [type(c)(c.kind, c.params, c.weight * eps) for c in contam.components]
    comps = [c for c in comps if c.weight > 0]
    return DistSpec(tuple(comps))
