"""Parametric one-dimensional laws, empirical samples, and seeded sampling.

DistSpec is a finite mixture of normal and uniform components with an
optional truncation interval; it exposes cdf / quantile / density /
sample. EmpiricalSample is a sorted, weighted point set whose quantile
function is the left-continuous generalized inverse of the step cdf.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

_KINDS = ("normal", "uniform")
_WEIGHT_TOL = 1e-12


class InputError(ValueError):
    """Invalid user-supplied data (files, constructor arguments)."""


@dataclass(frozen=True)
class Component:
    kind: str
    params: tuple[float, float]  # normal: (mu, sigma); uniform: (a, b)
    weight: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InputError(f"unknown component kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "weight", float(self.weight))
        if len(self.params) != 2:
            raise InputError("components take exactly two parameters")
        if self.kind == "normal" and self.params[1] <= 0:
            raise InputError("normal component needs sigma > 0")
        if self.kind == "uniform" and self.params[0] >= self.params[1]:
            raise InputError("uniform component needs a < b")
        if self.weight < 0:
            raise InputError("component weight must be nonnegative")

    def cdf(self, x):
        if self.kind == "normal":
            mu, sigma = self.params
            return special.ndtr((np.asarray(x, float) - mu) / sigma)
        a, b = self.params
        return np.clip((np.asarray(x, float) - a) / (b - a), 0.0, 1.0)

    def quantile(self, t):
        if self.kind == "normal":
            mu, sigma = self.params
            return mu + sigma * special.ndtri(np.asarray(t, float))
        a, b = self.params
        return a + (b - a) * np.asarray(t, float)

    def density(self, x):
        x = np.asarray(x, float)
        if self.kind == "normal":
            mu, sigma = self.params
            z = (x - mu) / sigma
            return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
        a, b = self.params
        return np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)


def normal(mu: float, sigma: float, weight: float = 1.0) -> Component:
    return Component("normal", (mu, sigma), weight)


def uniform(a: float, b: float, weight: float = 1.0) -> Component:
    return Component("uniform", (a, b), weight)


@dataclass(frozen=True)
class DistSpec:
    """Finite mixture of normal/uniform components, optionally truncated."""

    components: tuple[Component, ...]
    support_bounds: tuple[float, float] | None = None

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise InputError("DistSpec needs at least one component")
        total = sum(c.weight for c in comps)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise InputError(f"component weights sum to {total}, not 1")
        if self.support_bounds is not None:
            lo, hi = (float(v) for v in self.support_bounds)
            if not lo < hi:
                raise InputError("truncation interval needs lo < hi")
            object.__setattr__(self, "support_bounds", (lo, hi))

    # -- raw (untruncated) mixture -------------------------------------
    def _raw_cdf(self, x):
        x = np.asarray(x, float)
        out = np.zeros_like(x, dtype=float)
        for c in self.components:
            out += c.weight * c.cdf(x)
        return out

    def _raw_density(self, x):
        x = np.asarray(x, float)
        out = np.zeros_like(x, dtype=float)
        for c in self.components:
            out += c.weight * c.density(x)
        return out

    def _raw_quantile(self, t):
        t = np.asarray(t, float)
        if len(self.components) == 1:
            return self.components[0].quantile(t)
        # Mixture quantile by bracketed bisection on the cdf; the bracket
        # [min_i q_i(t), max_i q_i(t)] always contains F^{-1}(t).
        qs = np.stack([c.quantile(t) for c in self.components])
        lo = qs.min(axis=0)
        hi = qs.max(axis=0)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            below = self._raw_cdf(mid) < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.max(hi - lo) < 1e-13:
                break
        return 0.5 * (lo + hi)

    # -- public surface ------------------------------------------------
    def cdf(self, x):
        if self.support_bounds is None:
            return self._raw_cdf(x)
        lo, hi = self.support_bounds
        flo, fhi = self._raw_cdf(lo), self._raw_cdf(hi)
        if fhi - flo <= 0:
            raise InputError("truncation interval carries no mass")
        x = np.asarray(x, float)
        out = (self._raw_cdf(np.clip(x, lo, hi)) - flo) / (fhi - flo)
        return np.clip(out, 0.0, 1.0)

    def quantile(self, t):
        t = np.asarray(t, float)
        if np.any((t <= 0.0) | (t >= 1.0)):
            raise InputError("quantile defined for t in (0, 1)")
        if self.support_bounds is None:
            return self._raw_quantile(t)
        lo, hi = self.support_bounds
        flo, fhi = self._raw_cdf(lo), self._raw_cdf(hi)
        return np.clip(self._raw_quantile(flo + t * (fhi - flo)), lo, hi)

    def density(self, x):
        if self.support_bounds is None:
            return self._raw_density(x)
        lo, hi = self.support_bounds
        flo, fhi = self._raw_cdf(lo), self._raw_cdf(hi)
        x = np.asarray(x, float)
        inside = (x >= lo) & (x <= hi)
        return np.where(inside, self._raw_density(x) / (fhi - flo), 0.0)

    def support(self, tail: float = 1e-7) -> tuple[float, float]:
        """Effective support [quantile(tail), quantile(1 - tail)]."""
        q = self.quantile(np.array([tail, 1.0 - tail]))
        return float(q[0]), float(q[1])

    def mean(self) -> float:
        m = 0.0
        for c in self.components:
            if c.kind == "normal":
                m += c.weight * c.params[0]
            else:
                m += c.weight * 0.5 * (c.params[0] + c.params[1])
        if self.support_bounds is not None:
            t = np.linspace(1e-9, 1 - 1e-9, 20001)
            return float(np.trapz(self.quantile(t), t) / (t[-1] - t[0]))
        return m

    def sample(self, n: int, seed, with_labels: bool = False):
        return sample(self, n, seed, with_labels=with_labels)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "components": [
                {"kind": c.kind, "params": list(c.params), "weight": c.weight}
                for c in self.components
            ],
            "truncation": list(self.support_bounds) if self.support_bounds else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "DistSpec":
        comps = tuple(
            Component(c["kind"], tuple(c["params"]), c["weight"])
            for c in d["components"]
        )
        trunc = d.get("truncation")
        return cls(comps, tuple(trunc) if trunc else None)

    @classmethod
    def from_json(cls, s: str) -> "DistSpec":
        return cls.from_dict(json.loads(s))


def mixture(*pairs) -> DistSpec:
    """mixture((w1, comp1), (w2, comp2), ...) with reweighted components."""
    comps = tuple(Component(c.kind, c.params, w) for w, c in pairs)
    return DistSpec(comps)


@dataclass(frozen=True)
class EmpiricalSample:
    """Sorted values with nonnegative weights summing to one."""

    values: np.ndarray
    weights: np.ndarray
    labels: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, float)
        w = np.asarray(self.weights, float)
        if v.ndim != 1 or v.size == 0:
            raise InputError("values must be a nonempty 1-d array")
        if not np.all(np.isfinite(v)):
            raise InputError("values must be finite")
        if np.any(np.diff(v) < 0):
            raise InputError("values must be nondecreasing")
        if w.shape != v.shape:
            raise InputError("weights must match values")
        if np.any(w < 0) or abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise InputError("weights must be nonnegative and sum to 1")
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def cum_weights(self) -> np.ndarray:
        cw = np.cumsum(self.weights)
        cw[-1] = 1.0
        return cw

    def cdf(self, x):
        idx = np.searchsorted(self.values, np.asarray(x, float), side="right")
        cw = np.concatenate([[0.0], self.cum_weights])
        return cw[idx]

    def quantile(self, t):
        """Left-continuous generalized inverse of the step cdf."""
        t = np.asarray(t, float)
        if np.any((t <= 0.0) | (t > 1.0)):
            raise InputError("empirical quantile defined for t in (0, 1]")
        idx = np.searchsorted(self.cum_weights, t, side="left")
        return self.values[np.minimum(idx, self.size - 1)]

    def mean(self) -> float:
        return float(self.values @ self.weights)

    def reweighted(self, weights) -> "EmpiricalSample":
        return EmpiricalSample(self.values, np.asarray(weights, float))


def empirical_from_values(values) -> EmpiricalSample:
    v = np.asarray(values, float)
    if v.ndim != 1 or v.size == 0:
        raise InputError("need a nonempty list of reals")
    if not np.all(np.isfinite(v)):
        raise InputError("values must be finite")
    v = np.sort(v)
    n = v.size
    return EmpiricalSample(v, np.full(n, 1.0 / n))


def sample(spec: DistSpec, n: int, seed, with_labels: bool = False) -> EmpiricalSample:
    """n i.i.d. draws by inverse cdf applied to the seeded uniform stream.

    With with_labels=True a second uniform stream assigns each draw its
    mixture component from the posterior given the value, so the value
    stream is unchanged.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    rng = seed.generator()
    u = rng.random(n)
    u = np.clip(u, 1e-15, 1.0 - 1e-15)
    x = np.asarray(spec.quantile(u), float)
    labels = None
    if with_labels:
        v = rng.random(n)
        dens = np.stack([c.weight * c.density(x) for c in spec.components])
        tot = dens.sum(axis=0)
        tot[tot <= 0] = 1.0
        post = np.cumsum(dens / tot, axis=0)
        labels = (v[None, :] > post).sum(axis=0)
        labels = np.minimum(labels, len(spec.components) - 1)
    order = np.argsort(x, kind="stable")
    x = x[order]
    if labels is not None:
        labels = labels[order]
    return EmpiricalSample(x, np.full(n, 1.0 / n), labels)


def read_sample_file(path) -> EmpiricalSample:
    """One real per line; '#' starts a comment; blank lines ignored."""
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                vals.append(float(text))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: not a number: {text!r}") from exc
    if not vals:
        raise InputError(f"{path}: no data values")
    return empirical_from_values(vals)
