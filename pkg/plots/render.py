#!/usr/bin/env python3
"""Render figures from trimsim harness CSV files.

Usage:
    python3 plots/render.py --figure N --in data.csv --out fig.png

Figures
    1  trimmed density curves        (trim_densities CSV)
    2  trimmed empirical processes   (trimmed_process CSV)
    3  p-value histogram             (pvalue_hist CSV)
    4  p-value vs trimming level     (pvalue_curve CSV)

The script only reads CSV — it never recomputes statistics — and exits
nonzero when the file does not carry the expected versioned schema.
"""
import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

CSV_VERSION = "trimsim-csv v1"

FIGURES = {
    1: ("trim_densities", ["alpha", "x", "fP_joint", "fQ_joint", "fP_common", "fQ_common"]),
    2: ("trimmed_process", ["alpha", "t", "D"]),
    3: ("pvalue_hist", ["rep", "p_value", "contam_frac"]),
    4: ("pvalue_curve", ["alpha", "p_value", "statistic", "alpha_n"]),
}


class SchemaError(Exception):
    pass


def read_table(path, kind, required):
    """Parse a harness CSV, checking the version header and columns."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        want = f"# {CSV_VERSION} {kind}"
        if header != want:
            raise SchemaError(f"{path}: expected header {want!r}, found {header!r}")
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing column row") from None
        missing = [c for c in required if c not in columns]
        if missing:
            raise SchemaError(f"{path}: missing columns: {', '.join(missing)}")
        rows = [r for r in reader if r]
    if not rows:
        raise SchemaError(f"{path}: no data rows to plot")
    table = {}
    for name in required:
        j = columns.index(name)
        table[name] = np.array(
            [float(r[j]) if r[j] != "" else np.nan for r in rows]
        )
    return table


def _per_alpha(table, keys):
    for a in np.unique(table["alpha"]):
        sel = table["alpha"] == a
        yield a, {k: table[k][sel] for k in keys}


def figure1(table, out):
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    for a, t in _per_alpha(table, ["x", "fP_joint", "fQ_joint", "fP_common", "fQ_common"]):
        top.plot(t["x"], t["fP_joint"], label=f"P, alpha={a:g}")
        top.plot(t["x"], t["fQ_joint"], "--", label=f"Q, alpha={a:g}")
        bottom.plot(t["x"], t["fP_common"], label=f"P, alpha={a:g}")
        bottom.plot(t["x"], t["fQ_common"], "--", label=f"Q, alpha={a:g}")
    top.set_title("optimal joint trimming")
    bottom.set_title("common trimming")
    bottom.set_xlabel("x")
    for ax in (top, bottom):
        ax.set_ylabel("density")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out)


def figure2(table, out):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for a, t in _per_alpha(table, ["t", "D"]):
        ax.plot(t["t"], t["D"], label=f"alpha={a:g}")
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("sqrt(n) (F_n^alpha(t) - t)")
    ax.set_title("trimmed uniform empirical process")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out)


def figure3(table, out):
    has_frac = np.isfinite(table["contam_frac"]).all()
    ncols = 2 if has_frac else 1
    fig, axes = plt.subplots(1, ncols, figsize=(4.5 * ncols, 4))
    axes = np.atleast_1d(axes)
    axes[0].hist(table["p_value"], bins=20, range=(0, 1), edgecolor="black")
    axes[0].set_xlabel("p-value")
    axes[0].set_ylabel("count")
    axes[0].set_title("bootstrap p-values")
    if has_frac:
        axes[1].scatter(table["contam_frac"], table["p_value"], s=12)
        axes[1].set_xlabel("realized contamination fraction")
        axes[1].set_ylabel("p-value")
        axes[1].set_title("p-value vs contamination")
    fig.tight_layout()
    fig.savefig(out)


def figure4(table, out):
    order = np.argsort(table["alpha"])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(table["alpha"][order], table["p_value"][order], marker="o")
    ax.set_xlabel("trimming level alpha")
    ax.set_ylabel("bootstrap p-value")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("p-value against trimming level")
    fig.tight_layout()
    fig.savefig(out)


RENDERERS = {1: figure1, 2: figure2, 3: figure3, 4: figure4}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="Render a figure from a harness CSV.")
    ap.add_argument("--figure", type=int, choices=sorted(FIGURES), required=True)
    ap.add_argument("--in", dest="infile", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    kind, required = FIGURES[args.figure]
    try:
        table = read_table(args.infile, kind, required)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    RENDERERS[args.figure](table, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
