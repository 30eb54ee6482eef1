"""Render figures from the CSV files written by the experiment runners.

Needs matplotlib (``pip install -e .[plot]``). Reads ``results/`` and
writes PNG files next to the CSVs. Missing experiments are skipped.
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _table(path):
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")


def plot_convergence(folder: Path):
    for path in sorted(folder.glob("convergence_seed*.csv")):
        t = _table(path)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for mode in np.unique(t["mode"]):
            r = t[t["mode"] == mode]
            ax.plot(r["sweep"], r["stat_err"], "-", label=f"mode {mode} statistical")
            ax.plot(r["sweep"], r["opt_err"], "--", label=f"mode {mode} optimization")
        ax.set_xlabel("sweep")
        ax.set_ylabel("log relative error")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path.with_suffix(".png"), dpi=120)
        plt.close(fig)


def plot_sweep(folder: Path):
    t = _table(folder / "sweep.csv")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for mode in np.unique(t["mode"]):
        for seed in np.unique(t["seed"]):
            r = t[(t["mode"] == mode) & (t["seed"] == seed)]
            r = r[np.argsort(r["lambda"])]
            ax.semilogx(r["lambda"], r["fpr"] + r["fnr"], color=f"C{mode - 1}", alpha=0.4)
    ax.set_xlabel("lambda")
    ax.set_ylabel("FPR + FNR")
    fig.tight_layout()
    fig.savefig(folder / "sweep.png", dpi=120)
    plt.close(fig)


def plot_mismatch(folder: Path):
    t = _table(folder / "mismatch.csv")
    gens, sizes = np.unique(t["generator"]), np.unique(t["n_obs"])
    fig, axes = plt.subplots(1, len(sizes), figsize=(4 * len(sizes), 3.5), squeeze=False)
    for ax, n in zip(axes[0], sizes):
        for c, g in enumerate(gens):
            r = t[(t["generator"] == g) & (t["n_obs"] == n)]
            # lambda grids are relative per dataset; average MCC at each grid position
            for seed in np.unique(r["seed"]):
                q = r[r["seed"] == seed]
                lams = np.unique(q["lambda"])
                mcc = [q[q["lambda"] == lam]["mcc"].mean() for lam in lams]
                ax.semilogx(lams, mcc, color=f"C{c}", alpha=0.5, label=g if seed == r["seed"].min() else None)
        ax.set_title(f"N = {n}")
        ax.set_xlabel("lambda")
        ax.set_ylabel("MCC")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(folder / "mismatch.png", dpi=120)
    plt.close(fig)


def plot_consistency(folder: Path):
    t = _table(folder / "consistency.csv")
    sizes = np.unique(t["n_obs"])
    med = [np.median(t[t["n_obs"] == n]["beta_err"]) for n in sizes]
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.loglog(t["n_obs"], t["beta_err"], ".", alpha=0.4)
    ax.loglog(sizes, med, "o-")
    ax.set_xlabel("N")
    ax.set_ylabel("off-diagonal error")
    fig.tight_layout()
    fig.savefig(folder / "consistency.png", dpi=120)
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("results", nargs="?", type=Path, default=Path("results"))
    root = ap.parse_args(argv).results
    for folder in sorted(p for p in root.iterdir() if p.is_dir()):
        if any(folder.glob("convergence_seed*.csv")):
            plot_convergence(folder)
        if (folder / "sweep.csv").exists():
            plot_sweep(folder)
        if (folder / "mismatch.csv").exists():
            plot_mismatch(folder)
        if (folder / "consistency.csv").exists():
            plot_consistency(folder)
        print(f"plotted {folder}")


if __name__ == "__main__":
    main()
