"""Edge-recovery and estimation-error metrics.

A support is a boolean ``m x m`` array that is True only on declared edges
in the strict upper triangle. Each nonzero off-diagonal pair of a factor
counts as one edge.
"""

from __future__ import annotations

import math

import numpy as np


def support_of(F, eps: float = 1e-8) -> np.ndarray:
    """Edges ``(i, j), i < j`` with ``|F[i, j]| > eps``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    F = np.asarray(F)
    return np.triu(np.abs(F) > eps, 1)


def _mask(S) -> np.ndarray:
    S = np.asarray(S, dtype=bool)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"support must be a square mask, got shape {S.shape}")
    return np.triu(S, 1)


def confusion(est, truth) -> tuple[int, int, int, int]:
    """``(TP, TN, FP, FN)`` over the ``m(m-1)/2`` upper-triangle positions."""
    est, truth = _mask(est), _mask(truth)
    if est.shape != truth.shape:
        raise ValueError(f"support sizes differ: {est.shape} vs {truth.shape}")
    m = est.shape[0]
    tp = int(np.sum(est & truth))
    fp = int(np.sum(est & ~truth))
    fn = int(np.sum(~est & truth))
    tn = m * (m - 1) // 2 - tp - fp - fn
    return tp, tn, fp, fn


def mcc(tp: int, tn: int, fp: int, fn: int) -> float:
    """Matthews correlation coefficient; 0 if any marginal count is zero."""
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(den)


def fpr_fnr(tp: int, tn: int, fp: int, fn: int) -> tuple[float, float]:
    """False positive and false negative rates; a rate with an empty base is 0."""
    fpr = fp / (fp + tn) if fp + tn else 0.0
    fnr = fn / (fn + tp) if fn + tp else 0.0
    return fpr, fnr


def rel_frob_error(A, B) -> float:
    """``||A - B||_F / ||B||_F``."""
    A, B = np.asarray(A, dtype=np.float64), np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    ref = np.linalg.norm(B)
    if ref == 0:
        raise ValueError("reference matrix has zero norm")
    return float(np.linalg.norm(A - B) / ref)


def threshold_to_sparsity(F, target: float) -> np.ndarray:
    """Keep the ``ceil(target * m(m-1)/2)`` largest off-diagonal entries by magnitude.

    Ties go to the lexicographically smaller pair ``(i, j)``.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError("target must lie in [0, 1]")
    F = np.asarray(F, dtype=np.float64)
    m = F.shape[0]
    iu, ju = np.triu_indices(m, 1)
    n_pairs = iu.size
    # float product can land a hair above an integer (0.05 * 2016)
    keep = min(n_pairs, math.ceil(round(target * n_pairs, 9)))
    # lexsort: last key is primary; pair index breaks ties in row-major order
    order = np.lexsort((np.arange(n_pairs), -np.abs(F[iu, ju])))[:keep]
    out = np.zeros((m, m), dtype=bool)
    out[iu[order], ju[order]] = True
    return out
