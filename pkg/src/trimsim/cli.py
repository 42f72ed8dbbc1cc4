"""Command-line interface.

Subcommands mirror the library surface: population tv/decomposition,
sample trimming, the bootstrap similarity test, and the simulation
drivers that emit versioned CSV for plotting.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .boottest import TestConfig, bootstrap_pvalue, ks_similarity_test
from .distmodel import DistSpec, InputError, read_sample_file
from .harness import (
    PVALUE_CURVE_COLUMNS,
    PVALUE_HIST_COLUMNS,
    RATES_COLUMNS,
    TRIM_DENSITY_COLUMNS,
    TRIMMED_PROCESS_COLUMNS,
    ExperimentConfig,
    emit_trim_densities,
    pvalue_curve,
    pvalue_histogram,
    rate_experiment,
    reproduce_table,
    run_experiment,
    trimmed_process_rows,
    write_csv,
)
from .rng import SeedSpec
from .similarity import canonical_decomposition, tv_distance
from .trimming import joint_optimal_trim

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECT = 3


def _load_spec(path) -> DistSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return DistSpec.from_dict(json.load(fh))


def _parse_floats(text):
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _emit_json(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_tv(args):
    p = _load_spec(args.dist1)
    q = _load_spec(args.dist2)
    d = tv_distance(p, q)
    print(format(d, ".10g"))
    if args.decomposition:
        dec = canonical_decomposition(p, q)
        rows = zip(dec.core.x, dec.core.f, dec.contam_p.f, dec.contam_q.f)
        write_csv(
            args.decomposition, "decomposition", ["x", "f0", "f1p", "f2p"], rows
        )
    return EXIT_OK


def _cmd_trim(args):
    x = read_sample_file(args.in1)
    y = read_sample_file(args.in2)
    sol = joint_optimal_trim(
        x, y, args.alpha, solver=args.solver, seed=SeedSpec(args.seed)
    )
    payload = sol.to_dict()
    payload["alpha"] = args.alpha
    _emit_json(payload, args.out)
    return EXIT_OK


def _cmd_test(args):
    x = read_sample_file(args.in1)
    y = read_sample_file(args.in2)
    cfg = TestConfig(
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        rho=args.rho,
        replicates=args.boot,
        seed=SeedSpec(args.seed),
    )
    res = bootstrap_pvalue(x, y, cfg)
    payload = res.to_dict()
    if args.baseline == "ks":
        payload["ks"] = ks_similarity_test(
            x, y, args.alpha, args.beta, seed=SeedSpec(args.seed, (7,))
        )
    _emit_json(payload)
    return EXIT_REJECT if res.decision == "reject" else EXIT_OK


def _cmd_simulate(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh))
    report = run_experiment(cfg)
    report.write(args.out, cfg.scenario)
    return EXIT_OK


def _cmd_reproduce_table(args):
    report = reproduce_table(
        args.table,
        scale=args.scale,
        seed=args.seed,
        nu=args.nu,
        n=args.n,
        rho=args.rho,
        gamma=args.gamma,
    )
    report.write(args.out, f"table{args.table}")
    return EXIT_OK


def _cmd_pvalue_curve(args):
    x = read_sample_file(args.in1)
    y = read_sample_file(args.in2)
    cfg = TestConfig(
        alpha=0.1,
        beta=args.beta,
        gamma=args.gamma,
        rho=args.rho,
        replicates=args.boot,
        seed=SeedSpec(args.seed),
    )
    rows = pvalue_curve(x, y, _parse_floats(args.alphas), cfg)
    write_csv(args.out, "pvalue_curve", PVALUE_CURVE_COLUMNS, rows)
    return EXIT_OK


def _cmd_pvalue_hist(args):
    p = _load_spec(args.dist1)
    q = _load_spec(args.dist2)
    cfg = TestConfig(
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        rho=args.rho,
        replicates=args.boot,
        seed=SeedSpec(args.seed),
    )
    rows = pvalue_histogram(
        p, q, args.n, args.reps, cfg, contam_label=args.contam_label
    )
    write_csv(args.out, "pvalue_hist", PVALUE_HIST_COLUMNS, rows)
    return EXIT_OK


def _cmd_rates(args):
    n_grid = [int(v) for v in args.n_grid.split(",")]
    slope, rows = rate_experiment(
        args.case, n_grid=n_grid, seed=args.seed, n_seeds=args.seeds
    )
    write_csv(args.out, "rates", RATES_COLUMNS, rows)
    print(format(slope, ".10g"))
    return EXIT_OK


def _cmd_trim_densities(args):
    p = _load_spec(args.dist1)
    q = _load_spec(args.dist2)
    rows = emit_trim_densities(
        p,
        q,
        _parse_floats(args.alphas),
        gridsize=args.gridsize,
        fit_n=args.fit_n,
        seed=args.seed,
    )
    write_csv(args.out, "trim_densities", TRIM_DENSITY_COLUMNS, rows)
    return EXIT_OK


def _cmd_trimmed_process(args):
    from .distmodel import DistSpec as DS
    from .distmodel import uniform

    x = read_sample_file(args.in1)
    target = _load_spec(args.target) if args.target else DS((uniform(0, 1),))
    rows = trimmed_process_rows(
        x,
        target,
        _parse_floats(args.alphas),
        gridsize=args.gridsize,
        seed=SeedSpec(args.seed),
    )
    write_csv(args.out, "trimmed_process", TRIMMED_PROCESS_COLUMNS, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trimsim",
        description="Similarity testing of univariate samples via "
        "optimally trimmed Wasserstein distances.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tv", help="total variation distance of two specs")
    p.add_argument("--dist1", required=True)
    p.add_argument("--dist2", required=True)
    p.add_argument("--decomposition", help="write core/contamination CSV here")
    p.set_defaults(fn=_cmd_tv)

    p = sub.add_parser("trim", help="jointly trim two samples optimally")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--in1", required=True)
    p.add_argument("--in2", required=True)
    p.add_argument("--solver", choices=["dp", "convex", "auto"], default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_trim)

    p = sub.add_parser("test", help="bootstrap similarity test")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in1", required=True)
    p.add_argument("--in2", required=True)
    p.add_argument("--baseline", choices=["ks"])
    p.set_defaults(fn=_cmd_test)

    p = sub.add_parser("simulate", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("reproduce-table", help="rejection-frequency grids")
    p.add_argument("--table", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--scale", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--nu", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--gamma", type=float)
    p.set_defaults(fn=_cmd_reproduce_table)

    p = sub.add_parser("pvalue-curve", help="p-values over trimming levels")
    p.add_argument("--in1", required=True)
    p.add_argument("--in2", required=True)
    p.add_argument("--alphas", required=True, help="comma-separated levels")
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--boot", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_pvalue_curve)

    p = sub.add_parser("pvalue-hist", help="replicated p-values for one pair")
    p.add_argument("--dist1", required=True)
    p.add_argument("--dist2", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--boot", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--contam-label", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_pvalue_hist)

    p = sub.add_parser("rates", help="trimmed-distance decay rates")
    p.add_argument(
        "--case", choices=["separated", "nonseparated"], required=True
    )
    p.add_argument("--n-grid", default="200,400,800,1600")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_rates)

    p = sub.add_parser("trim-densities", help="trimmed density curves")
    p.add_argument("--dist1", required=True)
    p.add_argument("--dist2", required=True)
    p.add_argument("--alphas", required=True)
    p.add_argument("--gridsize", type=int, default=512)
    p.add_argument("--fit-n", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_trim_densities)

    p = sub.add_parser(
        "trimmed-process", help="trimmed uniform empirical process"
    )
    p.add_argument("--in1", required=True)
    p.add_argument("--target", help="spec JSON; default U(0,1)")
    p.add_argument("--alphas", required=True)
    p.add_argument("--gridsize", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_trimmed_process)
    p.add_argument("--out", required=True)

    return ap


def main(argv=None) -> int:
    threads = os.environ.get("TRIMSIM_THREADS")
    if threads:
        # kernels run sequentially; cap numba's own pool for good measure
        os.environ.setdefault("NUMBA_NUM_THREADS", threads)
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
