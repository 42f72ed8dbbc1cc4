"""Experiment driver: rejection-frequency grids, p-value curves and
histograms, trimming-rate experiments, and trimmed-density emitters.

All outputs are deterministic per master seed and written as CSV with a
versioned header line so downstream plotting stays decoupled.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .boottest import TestConfig, bootstrap_pvalue, ks_similarity_test
from .distmodel import DistSpec, InputError, sample
from .rng import SeedSpec
from .similarity import contaminated, epsilon_for_tv
from .trimming import common_trim_distance, joint_optimal_trim
from .wasserstein import TabulatedQuantile

CSV_VERSION = "trimsim-csv v1"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".10g")


def write_csv(path, kind: str, columns: list[str], rows) -> None:
    """Write rows (sequences matching columns) under a versioned header."""
    lines = [f"# {CSV_VERSION} {kind}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def binomial_se(freq: float, reps: int) -> float:
    return math.sqrt(max(freq * (1.0 - freq), 0.0) / reps) if reps else float("nan")


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid of rejection-frequency cells for one distribution pair family.

    Either `contam` is set and each nu in nu_grid picks the mixing
    weight with d_TV(p, q) = nu, or `q` is a fixed alternative and
    nu_grid is ignored.
    """

    scenario: str
    p: DistSpec
    alpha: float
    n_grid: tuple[int, ...]
    rho_grid: tuple[float, ...]
    gamma_grid: tuple[float, ...]
    contam: DistSpec | None = None
    nu_grid: tuple[float, ...] = ()
    q: DistSpec | None = None
    beta: float = 0.05
    replications: int = 200
    bootstrap: int = 200
    master_seed: int = 0
    include_ks: bool = False
    ks_beta: float = 0.05

    def __post_init__(self):
        if (self.contam is None) == (self.q is None):
            raise InputError("set exactly one of contam (+nu_grid) or q")
        if self.contam is not None and not self.nu_grid:
            raise InputError("contam needs a nonempty nu_grid")
        for name in ("n_grid", "rho_grid", "gamma_grid", "nu_grid"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def cells(self):
        """Deterministic enumeration (index, nu, n, rho, gamma)."""
        nus = self.nu_grid if self.contam is not None else (None,)
        i = 0
        for nu in nus:
            for n in self.n_grid:
                for rho in self.rho_grid:
                    for gamma in self.gamma_grid:
                        yield i, nu, n, rho, gamma
                        i += 1

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "p": self.p.to_dict(),
            "contam": self.contam.to_dict() if self.contam else None,
            "q": self.q.to_dict() if self.q else None,
            "alpha": self.alpha,
            "nu_grid": list(self.nu_grid),
            "n_grid": list(self.n_grid),
            "rho_grid": list(self.rho_grid),
            "gamma_grid": list(self.gamma_grid),
            "beta": self.beta,
            "replications": self.replications,
            "bootstrap": self.bootstrap,
            "master_seed": self.master_seed,
            "include_ks": self.include_ks,
            "ks_beta": self.ks_beta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            scenario=d["scenario"],
            p=DistSpec.from_dict(d["p"]),
            contam=DistSpec.from_dict(d["contam"]) if d.get("contam") else None,
            q=DistSpec.from_dict(d["q"]) if d.get("q") else None,
            alpha=d["alpha"],
            nu_grid=tuple(d.get("nu_grid", ())),
            n_grid=tuple(d["n_grid"]),
            rho_grid=tuple(d["rho_grid"]),
            gamma_grid=tuple(d["gamma_grid"]),
            beta=d.get("beta", 0.05),
            replications=d.get("replications", 200),
            bootstrap=d.get("bootstrap", 200),
            master_seed=d.get("master_seed", 0),
            include_ks=d.get("include_ks", False),
            ks_beta=d.get("ks_beta", 0.05),
        )


@dataclass
class ExperimentReport:
    config: dict
    cells: list
    wall_time: float = 0.0

    TABLE_COLUMNS = (
        "scenario,nu,eps,n,rho,gamma,alpha,beta,R,B,"
        "rejection,se,ks_rejection,ks_se,error"
    ).split(",")

    def rows(self):
        for c in self.cells:
            yield [c.get(k) for k in self.TABLE_COLUMNS]

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config,
                "wall_time": round(self.wall_time, 3),
                "cells": self.cells,
            },
            sort_keys=True,
            indent=2,
        )

    def write(self, out_dir, stem: str) -> None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        write_csv(
            os.path.join(out_dir, f"{stem}.csv"),
            "table",
            self.TABLE_COLUMNS,
            self.rows(),
        )
        # wall time varies run to run; the JSON echo omits it for
        # byte-identical reruns
        payload = json.loads(self.to_json())
        payload.pop("wall_time", None)
        with open(
            os.path.join(out_dir, f"{stem}.json"), "w", encoding="utf-8"
        ) as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")


def _cell_q(cfg: ExperimentConfig, nu):
    if cfg.q is not None:
        return cfg.q, None
    eps = epsilon_for_tv(cfg.p, cfg.contam, nu)
    return contaminated(cfg.p, cfg.contam, eps), eps


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Rejection frequency for every grid cell; failures are recorded
    per cell and the run continues."""
    t0 = time.time()
    cells = []
    for idx, nu, n, rho, gamma in cfg.cells():
        record = {
            "scenario": cfg.scenario,
            "nu": nu,
            "eps": None,
            "n": n,
            "rho": rho,
            "gamma": gamma,
            "alpha": cfg.alpha,
            "beta": cfg.beta,
            "R": cfg.replications,
            "B": cfg.bootstrap,
            "rejection": None,
            "se": None,
            "ks_rejection": None,
            "ks_se": None,
            "error": None,
        }
        try:
            q, eps = _cell_q(cfg, nu)
            record["eps"] = eps
            cell_seed = SeedSpec(cfg.master_seed, (idx,))
            rejections = 0
            ks_rejections = 0
            for rep in range(cfg.replications):
                rs = cell_seed.derive(rep)
                x = sample(cfg.p, n, rs.derive(0))
                y = sample(q, n, rs.derive(1))
                tc = TestConfig(
                    alpha=cfg.alpha,
                    beta=cfg.beta,
                    gamma=gamma,
                    rho=rho,
                    replicates=cfg.bootstrap,
                    seed=rs.derive(2),
                )
                res = bootstrap_pvalue(x, y, tc)
                rejections += res.decision == "reject"
                if cfg.include_ks:
                    ks = ks_similarity_test(
                        x,
                        y,
                        cfg.alpha,
                        cfg.ks_beta,
                        seed=SeedSpec(cfg.master_seed, (999983,)),
                    )
                    ks_rejections += ks["decision"] == "reject"
            freq = rejections / cfg.replications
            record["rejection"] = freq
            record["se"] = binomial_se(freq, cfg.replications)
            if cfg.include_ks:
                kfreq = ks_rejections / cfg.replications
                record["ks_rejection"] = kfreq
                record["ks_se"] = binomial_se(kfreq, cfg.replications)
        except Exception as exc:  # keep the grid going, surface the cell
            record["error"] = f"{type(exc).__name__}: {exc}"
        cells.append(record)
    return ExperimentReport(cfg.to_dict(), cells, time.time() - t0)


# -- table reproductions -----------------------------------------------

_NORMAL = DistSpec.from_dict({"components": [{"kind": "normal", "params": [0, 1], "weight": 1.0}], "truncation": None})
_TABLE_RHOS = (1.0, 0.8, 2.0 / 3.0, 0.5)
_TABLE_GAMMAS = (0.05, 0.01)


def table_config(table: int, scale: int = 5, seed: int = 0) -> ExperimentConfig:
    """Rejection-frequency grids for the three simulation studies.

    1: outlier contamination N(10,1); 2: inlier contamination N(0,3);
    3: fixed trimodal alternative compared against the KS baseline.
    Outer replications are 1000/scale, bootstrap 1000/min(scale,5).
    """
    if scale < 1:
        raise InputError("scale must be >= 1")
    R = max(1000 // scale, 1)
    B = max(1000 // min(scale, 5), 1)
    if table == 1:
        return ExperimentConfig(
            scenario="outlier-contamination",
            p=_NORMAL,
            contam=DistSpec.from_dict({"components": [{"kind": "normal", "params": [10, 1], "weight": 1.0}], "truncation": None}),
            nu_grid=(0.10, 0.15, 0.20, 0.25),
            alpha=0.1,
            n_grid=(100, 300, 1000),
            rho_grid=_TABLE_RHOS,
            gamma_grid=_TABLE_GAMMAS,
            beta=0.05,
            replications=R,
            bootstrap=B,
            master_seed=seed,
        )
    if table == 2:
        return ExperimentConfig(
            scenario="inlier-contamination",
            p=_NORMAL,
            contam=DistSpec.from_dict({"components": [{"kind": "normal", "params": [0, 3], "weight": 1.0}], "truncation": None}),
            nu_grid=(0.10, 0.15, 0.20, 0.25, 0.30),
            alpha=0.1,
            n_grid=(100, 300, 1000),
            rho_grid=_TABLE_RHOS,
            gamma_grid=_TABLE_GAMMAS,
            beta=0.05,
            replications=R,
            bootstrap=B,
            master_seed=seed,
        )
    if table == 3:
        q = DistSpec.from_dict(
            {
                "components": [
                    {"kind": "normal", "params": [0, 1], "weight": 0.70},
                    {"kind": "normal", "params": [2.35, 1], "weight": 0.15},
                    {"kind": "normal", "params": [-2.35, 1], "weight": 0.15},
                ],
                "truncation": None,
            }
        )
        return ExperimentConfig(
            scenario="ks-vs-w2",
            p=_NORMAL,
            q=q,
            alpha=0.1,
            n_grid=(100, 300, 500, 1000),
            rho_grid=(0.8,),
            gamma_grid=(0.01,),
            beta=0.04,
            replications=R,
            bootstrap=B,
            master_seed=seed,
            include_ks=True,
            ks_beta=0.05,
        )
    raise InputError(f"unknown table {table}")


def _filter_config(cfg: ExperimentConfig, nu=None, n=None, rho=None, gamma=None):
    def pick(grid, want, tol=1e-9):
        if want is None:
            return grid
        kept = tuple(g for g in grid if abs(g - want) <= tol)
        if not kept:
            raise InputError(f"value {want} not in grid {grid}")
        return kept

    import dataclasses

    return dataclasses.replace(
        cfg,
        nu_grid=pick(cfg.nu_grid, nu) if cfg.contam is not None else (),
        n_grid=pick(cfg.n_grid, n),
        rho_grid=pick(cfg.rho_grid, rho),
        gamma_grid=pick(cfg.gamma_grid, gamma),
    )


def reproduce_table(
    table: int,
    scale: int = 5,
    seed: int = 0,
    nu=None,
    n=None,
    rho=None,
    gamma=None,
) -> ExperimentReport:
    """Run one of the three study grids, optionally restricted to
    matching cells (a single cell when all filters are given)."""
    cfg = table_config(table, scale, seed)
    cfg = _filter_config(cfg, nu=nu, n=n, rho=rho, gamma=gamma)
    return run_experiment(cfg)


# -- p-value curves and histograms -------------------------------------

PVALUE_CURVE_COLUMNS = ["alpha", "p_value", "statistic", "alpha_n"]


def pvalue_curve(x, y, alpha_grid, cfg: TestConfig):
    """One bootstrap p-value per trimming level on shared data.

    Each level gets a fresh derived seed stream; rows come back sorted
    by alpha.
    """
    rows = []
    for i, a in enumerate(sorted(alpha_grid)):
        tc = TestConfig(
            alpha=float(a),
            beta=cfg.beta,
            gamma=cfg.gamma,
            rho=cfg.rho,
            replicates=cfg.replicates,
            seed=cfg.seed.derive(i),
        )
        res = bootstrap_pvalue(x, y, tc)
        rows.append([float(a), res.p_value, res.statistic, res.alpha_n])
    return rows


PVALUE_HIST_COLUMNS = ["rep", "p_value", "contam_frac"]


def pvalue_histogram(
    p: DistSpec,
    q: DistSpec,
    n: int,
    reps: int,
    cfg: TestConfig,
    contam_label: int | None = None,
):
    """Replicated p-values with the realized contamination fraction.

    When contam_label is given, q's samples are drawn with component
    labels and the fraction of draws from that component is recorded.
    """
    rows = []
    for rep in range(reps):
        rs = cfg.seed.derive(rep)
        x = sample(p, n, rs.derive(0))
        y = sample(q, n, rs.derive(1), with_labels=contam_label is not None)
        tc = TestConfig(
            alpha=cfg.alpha,
            beta=cfg.beta,
            gamma=cfg.gamma,
            rho=cfg.rho,
            replicates=cfg.replicates,
            seed=rs.derive(2),
        )
        res = bootstrap_pvalue(x, y, tc)
        frac = None
        if contam_label is not None:
            frac = float(np.mean(y.labels == contam_label))
        rows.append([rep, res.p_value, frac])
    return rows


# -- trimming-rate experiments -----------------------------------------


def _epanechnikov_tables(gridsize: int = 8192):
    x = np.linspace(-1.0, 1.0, gridsize + 1)
    F = 0.25 * (2.0 + 3.0 * x - x ** 3)
    return x, F


def rate_fixture(case: str, alpha: float = 0.25):
    """Quantile functions (qP, qQ, core TabulatedQuantile) for the two
    convergence-rate examples.

    separated: P = U(0,1) against its alpha-shift, core U(alpha, 1).
    nonseparated: Epanechnikov density shifted by +-mu/2 with mu chosen
    so the overlap leaves total variation distance exactly alpha.
    """
    if case == "separated":
        qp = lambda t: np.asarray(t, float)  # noqa: E731
        qq = lambda t: np.asarray(t, float) + alpha  # noqa: E731
        core = TabulatedQuantile.from_function(
            lambda t: alpha + (1.0 - alpha) * np.asarray(t, float), gridsize=4096
        )
        return qp, qq, core
    if case == "nonseparated":
        x, F = _epanechnikov_tables()
        qf = lambda t: np.interp(np.asarray(t, float), F, x)  # noqa: E731
        half_mu = -qf((1.0 - alpha) / 2.0)
        qp = lambda t: qf(t) - half_mu  # noqa: E731
        qq = lambda t: qf(t) + half_mu  # noqa: E731

        def core_q(t):
            t = np.asarray(t, float)
            lo = qf((1.0 - alpha) * np.minimum(t, 1.0 - t)) + half_mu
            return np.where(t <= 0.5, lo, -lo)

        core = TabulatedQuantile.from_function(core_q, gridsize=4096)
        return qp, qq, core
    raise InputError(f"unknown rate case {case!r}")


RATES_COLUMNS = ["case", "n", "mean_distance", "se", "seeds"]


def rate_experiment(
    case: str,
    n_grid=(200, 400, 800, 1600),
    seed: int = 0,
    n_seeds: int = 50,
    alpha: float = 0.25,
):
    """Fit the log-log decay rate of W2(trimmed sample, core).

    For each n, samples the fixture pair, jointly trims at
    alpha_n = alpha + 1/sqrt(n), and measures the distance from the
    trimmed first sample to the population core; returns the OLS slope
    of log mean distance against log n plus the per-n rows.
    """
    n_grid = tuple(int(v) for v in n_grid)
    if len(n_grid) < 4 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise InputError("n_grid must be increasing with at least 4 points")
    qp, qq, core = rate_fixture(case, alpha)
    from .distmodel import EmpiricalSample

    rows = []
    means = []
    for n in n_grid:
        alpha_n = alpha + 1.0 / math.sqrt(n)
        dists = np.empty(n_seeds)
        for s in range(n_seeds):
            rs = SeedSpec(seed, (n, s))
            gx = rs.derive(0).generator()
            gy = rs.derive(1).generator()
            xv = np.sort(qp(np.clip(gx.random(n), 1e-12, 1 - 1e-12)))
            yv = np.sort(qq(np.clip(gy.random(n), 1e-12, 1 - 1e-12)))
            P = EmpiricalSample(xv, np.full(n, 1.0 / n))
            Q = EmpiricalSample(yv, np.full(n, 1.0 / n))
            sol = joint_optimal_trim(
                P, Q, alpha_n, solver="convex", seed=rs.derive(2)
            )
            d2 = core.w2sq_to_step(
                sol.trimmed_p.values, sol.trimmed_p.cum_weights
            )
            dists[s] = math.sqrt(max(d2, 0.0))
        mean = float(dists.mean())
        rows.append(
            [case, n, mean, float(dists.std(ddof=1) / math.sqrt(n_seeds)), n_seeds]
        )
        means.append(mean)
    slope = float(
        np.polyfit(np.log(np.asarray(n_grid, float)), np.log(means), 1)[0]
    )
    return slope, rows


# -- trimmed densities (figure 1 data) ---------------------------------

TRIM_DENSITY_COLUMNS = ["alpha", "x", "fP_joint", "fQ_joint", "fP_common", "fQ_common"]


def _smoothed_density(values, weights, grid):
    """Box-kernel smoothing of atom weights onto a uniform grid."""
    dx = grid[1] - grid[0]
    h = 2.0 * dx
    edges = np.concatenate([grid - 0.5 * dx, [grid[-1] + 0.5 * dx]])
    hist, _ = np.histogram(values, bins=edges, weights=weights)
    f = hist / dx
    kernel = np.ones(5) / 5.0  # moving average spanning +-h
    f = np.convolve(f, kernel, mode="same")
    total = np.trapezoid(f, grid)
    return f / total if total > 0 else f


def emit_trim_densities(
    p: DistSpec,
    q: DistSpec,
    alphas,
    gridsize: int = 512,
    fit_n: int = 20000,
    seed: int = 0,
):
    """Gridded densities of jointly trimmed and commonly trimmed pairs.

    Joint-trim curves come from trimming one large sample per law and
    smoothing the retained weights; common-trim curves are exact
    (density times the optimal slope at the own quantile level).
    """
    lo = min(p.support()[0], q.support()[0])
    hi = max(p.support()[1], q.support()[1])
    grid = np.linspace(lo, hi, gridsize)
    rows = []
    for a in alphas:
        a = float(a)
        if a == 0.0:
            fpj = np.asarray(p.density(grid), float)
            fqj = np.asarray(q.density(grid), float)
            fpc, fqc = fpj, fqj
        else:
            rs = SeedSpec(seed, (int(round(a * 1e6)),))
            xs = sample(p, fit_n, rs.derive(0))
            ys = sample(q, fit_n, rs.derive(1))
            sol = joint_optimal_trim(xs, ys, a, solver="convex", seed=rs.derive(2))
            fpj = _smoothed_density(xs.values, sol.weights_p, grid)
            fqj = _smoothed_density(ys.values, sol.weights_q, grid)
            _, h = common_trim_distance(p, q, a)
            fpc = np.asarray(p.density(grid), float) * np.interp(
                np.clip(p.cdf(grid), 0, 1),
                (np.arange(h.gridsize) + 0.5) / h.gridsize,
                h.slopes,
            )
            fqc = np.asarray(q.density(grid), float) * np.interp(
                np.clip(q.cdf(grid), 0, 1),
                (np.arange(h.gridsize) + 0.5) / h.gridsize,
                h.slopes,
            )
        for j, xj in enumerate(grid):
            rows.append([a, float(xj), fpj[j], fqj[j], fpc[j], fqc[j]])
    return rows


TRIMMED_PROCESS_COLUMNS = ["alpha", "t", "D"]


def trimmed_process_rows(P, target, alphas, gridsize: int = 512, seed=None):
    """(alpha, t, D) rows of the trimmed uniform empirical process."""
    from .trimming import trimmed_empirical_process

    rows = []
    for a in alphas:
        t, D = trimmed_empirical_process(
            P, target, float(a), gridsize=gridsize, seed=seed
        )
        for tj, dj in zip(t, D):
            rows.append([float(a), float(tj), float(dj)])
    return rows
