"""Error of the off-diagonal estimate as the sample size grows.

Fits an AR(1) x AR(1) truth (m = 16 x 16) for several sample sizes and
seeds with ``lambda = c * N * sqrt(log p / N)`` and writes
``consistency.csv`` with columns ``n_obs, seed, lambda, beta_err``.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from syglasso import FactorSet, SolverConfig, fit, gen_ar1, sample_sylvester, standardize
from syglasso.experiments import write_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/consistency"))
    ap.add_argument("--m", type=int, default=16)
    ap.add_argument("--rho", type=float, default=0.6)
    ap.add_argument("--n-obs", type=int, nargs="+", default=[10, 40, 160])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--c", type=float, default=1.0, help="penalty constant")
    args = ap.parse_args(argv)

    F = [gen_ar1(args.m, args.rho), gen_ar1(args.m, args.rho)]
    truth = FactorSet.from_factors(F).beta()
    p = args.m * args.m
    rows = []
    for n in args.n_obs:
        lam = args.c * n * math.sqrt(math.log(p) / n)
        errs = []
        for seed in range(args.seeds):
            X = standardize(sample_sylvester(F, n, seed=seed))
            err = float(np.linalg.norm(fit(X, SolverConfig(lambdas=lam)).factors.beta() - truth))
            rows.append((n, seed, lam, err))
            errs.append(err)
        print(f"N={n:5d}  median error {np.median(errs):.4f}")
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "consistency.csv", ("n_obs", "seed", "lambda", "beta_err"), rows)


if __name__ == "__main__":
    main()
