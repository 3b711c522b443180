"""Render figures from a run's delimited outputs.

Reads the CSV files an experiment wrote (never the in-memory state), so
figures can be regenerated from any finished run directory. All figures
land in ``<run_dir>/figures/``.
"""

import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import InputError

__all__ = ["plot_run", "plot_comparison"]


def _read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    return header, rows


def _figures_dir(run_dir):
    out = os.path.join(run_dir, "figures")
    os.makedirs(out, exist_ok=True)
    return out


def plot_run(run_dir, out_dir=None):
    """Figures for one run: mean trajectories and the final group table."""
    summary = os.path.join(run_dir, "summary.csv")
    if not os.path.exists(summary):
        raise InputError(f"no summary.csv under {run_dir}")
    out_dir = out_dir or _figures_dir(run_dir)
    _, rows = _read_csv(summary)
    by_k = defaultdict(lambda: ([], []))
    for k, _user, f_mean, d_mean in rows:
        fs, ds = by_k[int(k)]
        fs.append(float(f_mean))
        ds.append(float(d_mean))
    ks = sorted(by_k)
    f_avg = np.array([np.mean(by_k[k][0]) for k in ks])
    d_avg = np.array([np.mean(by_k[k][1]) for k in ks])
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    positive = d_avg > 0
    if positive.any():
        ax.semilogy(np.array(ks)[positive], d_avg[positive], lw=1.5)
    else:
        ax.plot(ks, d_avg, lw=1.5)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("mean feasibility measure D")
    ax.set_title("Feasibility (mean over users and samplings)")
    fig.tight_layout()
    p = os.path.join(out_dir, "feasibility.png")
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, f_avg, lw=1.5)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("mean objective F")
    ax.set_title("Objective (mean over users and samplings)")
    fig.tight_layout()
    p = os.path.join(out_dir, "objective.png")
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    groups = os.path.join(run_dir, "groups.csv")
    if os.path.exists(groups):
        _, rows = _read_csv(groups)
        gs = [int(r[0]) for r in rows]
        f_g = [float(r[1]) for r in rows]
        d_g = [float(r[2]) for r in rows]
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        ax1.bar(gs, f_g, color="#4878d0")
        ax1.set_xlabel("group")
        ax1.set_ylabel("F_G")
        ax2.bar(gs, d_g, color="#d65f5f")
        ax2.set_xlabel("group")
        ax2.set_ylabel("D_G")
        if any(v > 0 for v in d_g):
            ax2.set_yscale("log")
        fig.suptitle("Final group aggregates")
        fig.tight_layout()
        p = os.path.join(out_dir, "groups.png")
        fig.savefig(p, dpi=150)
        plt.close(fig)
        paths.append(p)
    return paths


def plot_comparison(compare_dir, out_dir=None):
    """Grouped bars of per-group F_G and D_G across compared schedules."""
    path = os.path.join(compare_dir, "comparison.csv")
    if not os.path.exists(path):
        raise InputError(f"no comparison.csv under {compare_dir}")
    out_dir = out_dir or _figures_dir(compare_dir)
    header, rows = _read_csv(path)
    labels = [h[len("F_G[") : -1] for h in header[1:] if h.startswith("F_G[")]
    gs = np.array([int(r[0]) for r in rows])
    n = len(labels)
    width = 0.8 / n
    paths = []
    for prefix, fname, log_ok in (("F_G", "compare_objective.png", False),
                                  ("D_G", "compare_feasibility.png", True)):
        fig, ax = plt.subplots(figsize=(8, 4))
        cols = [i for i, h in enumerate(header[1:]) if h.startswith(prefix)]
        any_positive = False
        for pos, (ci, label) in enumerate(zip(cols, labels)):
            vals = np.array([float(r[1 + ci]) for r in rows])
            any_positive = any_positive or bool((vals > 0).any())
            ax.bar(gs + (pos - (n - 1) / 2) * width, vals, width=width, label=label)
        ax.set_xlabel("group")
        ax.set_ylabel(prefix)
        if log_ok and any_positive:
            ax.set_yscale("log")
        ax.legend(title="step size")
        ax.set_title(f"{prefix} by schedule")
        fig.tight_layout()
        p = os.path.join(out_dir, fname)
        fig.savefig(p, dpi=150)
        plt.close(fig)
        paths.append(p)
    return paths
