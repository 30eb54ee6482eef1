"""Desk-scale experiment runners behind the command line.

Every runner writes CSV files (header row, UTF-8, LF endings) into the
output directory plus ``records.jsonl`` with per-cell traces and wall
times. CSV contents depend only on the spec and seeds; the
``(seed, lambda)`` cells of a grid are independent and may run on a
thread pool.
"""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ExperimentSpec, SpecError
from .kron import kron_product_materialize, kron_sum_materialize
from .metrics import (
    confusion,
    fpr_fnr,
    mcc,
    rel_frob_error,
    support_of,
    threshold_to_sparsity,
)
from .solver import FitReport, SolverConfig, fit, lambda_max
from .sygt import read_sygt, write_sygt
from .synth import sample_precision, sample_sylvester, standardize


@dataclass
class RunRecord:
    spec_hash: str
    seed: int
    lam: float
    n_obs: int
    generator: str = "native"
    objective_trace: list[float] = field(default_factory=list)
    delta_trace: list[float] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    sweeps: int = 0
    converged: bool = False
    wall_time: float = 0.0


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_records(path: Path, records: Sequence[RunRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(asdict(r)) + "\n")


def truth_factors(spec: ExperimentSpec) -> list[np.ndarray]:
    return [g.build() for g in spec.modes]


def make_data(factors, generator: str, n_obs: int, seed: int, std: bool = True) -> np.ndarray:
    """Sample a dataset and standardize it when there are at least two observations."""
    dims = tuple(F.shape[0] for F in factors)
    if generator == "native":
        X = sample_sylvester(factors, n_obs, seed)
    elif generator == "ks":
        X = sample_precision(kron_sum_materialize(factors), dims, n_obs, seed)
    elif generator == "kp":
        X = sample_precision(kron_product_materialize(factors), dims, n_obs, seed)
    else:
        raise SpecError(f"unknown generator {generator!r}")
    return standardize(X) if std and n_obs >= 2 else X


def lambda_grid(spec: ExperimentSpec, X: np.ndarray) -> np.ndarray:
    lam_max = lambda_max(X) if spec.lambdas.relative else 1.0
    return spec.lambdas.resolve(lam_max)


def _fit(X, lam: float, spec: ExperimentSpec, record_path: bool = False) -> tuple[FitReport, float]:
    cfg = SolverConfig(lambdas=lam, tol=spec.tol, max_sweeps=spec.max_sweeps, record_path=record_path)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        # the N = 1 reference runs cannot be standardized
        warnings.filterwarnings("ignore", "data do not look standardized")
        rep = fit(X, cfg)
    return rep, time.perf_counter() - t0


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def offdiag_of(F) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    return F - np.diag(np.diag(F))


def _rel_err(A, B) -> float:
    # an all-zero reference falls back to the absolute Frobenius error
    if not np.any(B):
        return float(np.linalg.norm(A - B))
    return rel_frob_error(A, B)


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def run_convergence(spec: ExperimentSpec, out: Path, threads: int = 1) -> list[RunRecord]:
    """Per-sweep statistical and optimization errors of each mode's off-diagonal factor.

    Writes ``convergence_seed<s>.csv`` with columns ``sweep, mode, stat_err,
    opt_err`` (natural logs; modes 1-based) and ``objective_seed<s>.csv``
    with the objective, the largest change and the relative change of ``W``
    per sweep. Sweep 0 is the starting point.
    """
    truth = truth_factors(spec)
    true_off = [offdiag_of(F) for F in truth]

    def cell(seed):
        X = make_data(truth, spec.generators[0], spec.n_obs[0], seed, spec.standardize)
        lam = float(lambda_grid(spec, X)[0])
        rep, wall = _fit(X, lam, spec, record_path=True)
        rows = []
        final = rep.path[-1]
        for t, factors in enumerate(rep.path):
            for k, P in enumerate(factors):
                stat = _log(_rel_err(P, true_off[k]))
                opt = _log(_rel_err(P, final[k]))
                rows.append((t, k + 1, stat, opt))
        w_rows = []
        for t, W in enumerate(rep.w_path):
            delta = rep.delta_trace[t - 1] if t else math.nan
            w_rows.append((t, rep.objective_trace[t], delta, _rel_err(W, rep.w_path[-1])))
        rec = RunRecord(spec.digest, seed, lam, spec.n_obs[0], spec.generators[0],
                        rep.objective_trace, rep.delta_trace,
                        {"final_stat_err": [r[2] for r in rows[-len(truth):]]},
                        rep.sweeps, rep.converged, wall)
        return rows, w_rows, rec

    results = _map(cell, spec.seeds, threads)
    out.mkdir(parents=True, exist_ok=True)
    for seed, (rows, w_rows, _) in zip(spec.seeds, results):
        write_csv(out / f"convergence_seed{seed}.csv", ("sweep", "mode", "stat_err", "opt_err"), rows)
        write_csv(out / f"objective_seed{seed}.csv", ("sweep", "objective", "max_delta", "w_rel_change"), w_rows)
    records = [r[2] for r in results]
    write_records(out / "records.jsonl", records)
    return records


def _support_metrics(rep: FitReport, truth: Sequence[np.ndarray]) -> list[dict]:
    out = []
    for k, F in enumerate(truth):
        c = confusion(support_of(rep.factors.offdiag[k]), support_of(offdiag_of(F)))
        fpr, fnr = fpr_fnr(*c)
        out.append({"fpr": fpr, "fnr": fnr, "mcc": mcc(*c), "confusion": list(c)})
    return out


def _grid_cells(spec: ExperimentSpec, truth, generator: str, n_obs: int, threads: int):
    datasets = {s: make_data(truth, generator, n_obs, s, spec.standardize) for s in spec.seeds}
    cells = [(s, float(lam)) for s in spec.seeds for lam in lambda_grid(spec, datasets[s])]

    def cell(item):
        seed, lam = item
        rep, wall = _fit(datasets[seed], lam, spec)
        rec = RunRecord(spec.digest, seed, lam, n_obs, generator, rep.objective_trace,
                        rep.delta_trace, {"modes": _support_metrics(rep, truth)},
                        rep.sweeps, rep.converged, wall)
        return rec

    return _map(cell, cells, threads)


def run_lambda_sweep(spec: ExperimentSpec, out: Path, threads: int = 1) -> list[RunRecord]:
    """Support recovery along the penalty grid; ``sweep.csv`` has
    ``lambda, seed, mode, fpr, fnr, mcc``."""
    if len(spec.n_obs) != 1:
        raise SpecError("lambda_sweep takes a single n_obs")
    truth = truth_factors(spec)
    records = _grid_cells(spec, truth, spec.generators[0], spec.n_obs[0], threads)
    rows = [
        (r.lam, r.seed, k + 1, m["fpr"], m["fnr"], m["mcc"])
        for r in records
        for k, m in enumerate(r.metrics["modes"])
    ]
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", ("lambda", "seed", "mode", "fpr", "fnr", "mcc"), rows)
    write_records(out / "records.jsonl", records)
    return records


def run_mismatch(spec: ExperimentSpec, out: Path, threads: int = 1) -> list[RunRecord]:
    """MCC curves when the data come from the squared Kronecker sum (``native``),
    the Kronecker sum (``ks``) or the Kronecker product (``kp``) precision.

    ``mismatch.csv`` has ``generator, n_obs, lambda, seed, mode, mcc``.
    """
    truth = truth_factors(spec)
    records = []
    for gen in spec.generators:
        for n in spec.n_obs:
            records.extend(_grid_cells(spec, truth, gen, n, threads))
    rows = [
        (r.generator, r.n_obs, r.lam, r.seed, k + 1, m["mcc"])
        for r in records
        for k, m in enumerate(r.metrics["modes"])
    ]
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "mismatch.csv", ("generator", "n_obs", "lambda", "seed", "mode", "mcc"), rows)
    write_records(out / "records.jsonl", records)
    return records


def fit_dataset(X: np.ndarray, spec: ExperimentSpec) -> tuple[FitReport, float]:
    """Standardize (when requested) and fit at the spec's single penalty."""
    if spec.standardize and X.shape[-1] >= 2:
        X = standardize(X)
    lam = float(lambda_grid(spec, X)[0])
    rep, _ = _fit(X, lam, spec)
    return rep, lam


def run_fit_external(spec: ExperimentSpec, out: Path, threads: int = 1) -> list[RunRecord]:
    """Fit a SYGT dataset (observations in the last mode).

    Writes ``psi_offdiag_mode<k>.sygt`` per mode, ``w.sygt``, the
    thresholded supports in ``support.csv`` (``mode, i, j, value``, 1-based
    indices) and a one-line ``fit.csv`` summary.
    """
    X = read_sygt(spec.data)
    if X.ndim < 2:
        raise SpecError("data file needs at least one variable mode and an observation mode")
    t0 = time.perf_counter()
    rep, lam = fit_dataset(X, spec)
    wall = time.perf_counter() - t0
    out.mkdir(parents=True, exist_ok=True)
    S = rep.factors
    for k, P in enumerate(S.offdiag):
        write_sygt(out / f"psi_offdiag_mode{k + 1}.sygt", P)
    write_sygt(out / "w.sygt", S.W)
    rows = []
    for k, P in enumerate(S.offdiag):
        mask = threshold_to_sparsity(P, spec.sparsity)
        for i, j in zip(*np.nonzero(mask)):
            rows.append((k + 1, int(i) + 1, int(j) + 1, float(P[i, j])))
    write_csv(out / "support.csv", ("mode", "i", "j", "value"), rows)
    write_csv(out / "fit.csv", ("lambda", "sweeps", "converged", "objective"),
              [(lam, rep.sweeps, int(rep.converged), rep.objective_trace[-1])])
    rec = RunRecord(spec.digest, spec.seeds[0], lam, X.shape[-1], "external",
                    rep.objective_trace, rep.delta_trace, {"edges": len(rows)},
                    rep.sweeps, rep.converged, wall)
    write_records(out / "records.jsonl", [rec])
    return [rec]


def generate(spec: ExperimentSpec, out: Path, name: str = "data.sygt") -> Path:
    """Write a synthetic dataset (first seed, first n_obs, first generator) and its truth.

    The data go to ``out / name`` unstandardized (fitting standardizes
    them); the true factors go next to it as ``psi_true_mode<k>.sygt``.
    """
    truth = truth_factors(spec)
    X = make_data(truth, spec.generators[0], spec.n_obs[0], spec.seeds[0], std=False)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    write_sygt(path, X)
    for k, F in enumerate(truth):
        write_sygt(out / f"psi_true_mode{k + 1}.sygt", F)
    return path


RUNNERS = {
    "convergence": run_convergence,
    "lambda_sweep": run_lambda_sweep,
    "mismatch": run_mismatch,
    "fit_external": run_fit_external,
}
