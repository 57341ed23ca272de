#!/usr/bin/env python3
"""Plot the outputs of `rlqaoa sweep` and `rlqaoa adiabatic-scan`.

    python scripts/plot_sweep.py runs/sweep/results.csv -o sweep.png
    python scripts/plot_sweep.py runs/scan/adiabatic_scan.csv -o scan.png
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

SUPPORTED_SCHEMA = 1


def check_schema(df, path):
    versions = set(df["schema_version"].unique())
    if versions != {SUPPORTED_SCHEMA}:
        sys.exit(f"{path}: schema_version {sorted(versions)}, this script reads {SUPPORTED_SCHEMA}")


def plot_results(df, ax, metric):
    ok = df[df["status"] == "ok"].copy()
    ok["setting"] = ok["noise_kind"] + " " + ok["noise_strength"].map("{:g}".format)
    settings = list(dict.fromkeys(ok["setting"]))
    algorithms = list(dict.fromkeys(ok["algorithm"]))
    width = 0.8 / max(len(algorithms), 1)
    for i, alg in enumerate(algorithms):
        g = ok[ok["algorithm"] == alg].groupby("setting")[metric]
        means = g.mean().reindex(settings)
        stds = g.std().reindex(settings).fillna(0.0)
        xs = [k + (i - (len(algorithms) - 1) / 2) * width for k in range(len(settings))]
        ax.bar(xs, means, width, yerr=stds, capsize=3, label=alg)
    ax.set_xticks(range(len(settings)), settings, rotation=20)
    ax.set_ylabel(f"E / E_GS ({metric})")
    ax.legend()
    failed = (df["status"] != "ok").sum()
    if failed:
        ax.set_title(f"{failed} failed cells omitted")


def plot_scan(df, ax):
    for method, g in df.groupby("method", sort=False):
        g = g.sort_values("total_t")
        ax.plot(g["total_t"], g["ratio"], marker="o", label=method)
    ax.set_xscale("log")
    ax.set_xlabel("total duration JT")
    ax.set_ylabel("E / E_GS")
    ax.legend()


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", default="sweep.png")
    ap.add_argument("--metric", default="final_greedy_ratio", choices=["final_greedy_ratio", "best_clean_ratio"])
    args = ap.parse_args()

    df = pd.read_csv(args.csv)
    check_schema(df, args.csv)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if "method" in df.columns:
        plot_scan(df, ax)
    else:
        plot_results(df, ax, args.metric)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
