"""Nodewise coordinate-descent estimator for Sylvester graphical models.

Data are arrays of shape ``(m_1, ..., m_K, N)`` with observations in the
last mode. The parameters are the off-diagonal parts ``Psi_k^off`` of the
mode factors and the diagonal field ``W[i] = sum_k (Psi_k)[i_k, i_k]``;
the individual factor diagonals are not identifiable and never estimated.

The objective minimized is

    -N sum_i log W[i] + 1/2 sum_{i,s} (W[i] X[i,s] + Y[i,s])^2
        + sum_k lambda_k sum_{a != b} |Psi_k[a, b]|

with ``Y = sum_k X x_k Psi_k^off``. The penalty counts both symmetric
entries, so a single coordinate update soft-thresholds at ``2 lambda_k / N``
on the per-sample scale. Factors are not constrained to be positive definite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _cd
from .kron import MAX_DENSE, embed
from .tensor import matricize, mode_product


class NumericalError(FloatingPointError):
    """Non-finite values appeared during a fit."""

    def __init__(self, message: str, sweep: int):
        super().__init__(f"{message} (sweep {sweep})")
        self.sweep = sweep


@dataclass
class FactorSet:
    """Off-diagonal factors (zero diagonals) plus the diagonal field ``W``."""

    offdiag: list[np.ndarray]
    W: np.ndarray

    def __post_init__(self):
        self.offdiag = [np.array(P, dtype=np.float64) for P in self.offdiag]
        self.W = np.array(self.W, dtype=np.float64)
        dims = tuple(P.shape[0] for P in self.offdiag)
        if self.W.shape != dims:
            raise ValueError(f"W has shape {self.W.shape}, factors imply {dims}")
        for k, P in enumerate(self.offdiag):
            if P.shape != (P.shape[0], P.shape[0]) or not np.array_equal(P, P.T):
                raise ValueError(f"off-diagonal factor {k} must be square and symmetric")
            if np.any(np.diag(P) != 0):
                raise ValueError(f"off-diagonal factor {k} has a nonzero diagonal")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.W.shape

    @classmethod
    def zeros(cls, dims: Sequence[int], w: float = 1.0) -> FactorSet:
        return cls([np.zeros((m, m)) for m in dims], np.full(tuple(dims), float(w)))

    @classmethod
    def from_factors(cls, factors: Sequence) -> FactorSet:
        """Split full factors into off-diagonal parts and the summed diagonal."""
        offdiag, W = [], np.zeros(())
        for F in factors:
            F = np.asarray(F, dtype=np.float64)
            offdiag.append(F - np.diag(np.diag(F)))
            W = np.add.outer(W, np.diag(F))
        return cls(offdiag, W)

    def copy(self) -> FactorSet:
        return FactorSet([P.copy() for P in self.offdiag], self.W.copy())

    def beta(self) -> np.ndarray:
        """Strict-upper-triangle entries of all factors, mode by mode, row-major."""
        return np.concatenate([P[np.triu_indices(P.shape[0], 1)] for P in self.offdiag])


@dataclass
class SolverConfig:
    """Coordinate-descent settings.

    ``lambdas`` is one penalty per mode or a scalar shared by all modes.
    ``fixed_w`` holds ``W`` at a given tensor instead of estimating it.
    ``record_path`` keeps a copy of the off-diagonal factors after every
    sweep (index 0 is the initial point).
    """

    lambdas: float | Sequence[float] = 0.0
    tol: float = 1e-6
    max_sweeps: int = 500
    w_floor: float = 1e-12
    fixed_w: np.ndarray | None = None
    record_path: bool = False
    engine: str = "numba"

    def __post_init__(self):
        if np.any(np.asarray(self.lambdas, dtype=float) < 0):
            raise ValueError("penalties must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps must be nonnegative")
        if self.engine not in ("numba", "python"):
            raise ValueError(f"unknown engine {self.engine!r}")

    def mode_lambdas(self, K: int) -> np.ndarray:
        lam = np.broadcast_to(np.asarray(self.lambdas, dtype=np.float64), (K,))
        return lam.copy()


@dataclass
class FitReport:
    factors: FactorSet
    objective_trace: list[float]
    delta_trace: list[float]
    sweeps: int
    converged: bool
    skipped: int = 0
    path: list[list[np.ndarray]] = field(default_factory=list)
    w_path: list[np.ndarray] = field(default_factory=list)


def _data(X, dims: Sequence[int] | None = None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim < 2:
        raise ValueError("data must have at least one variable mode and an observation mode")
    if dims is not None and X.shape[:-1] != tuple(dims):
        raise ValueError(f"data of shape {X.shape} does not match parameter dims {tuple(dims)}")
    return X


def regression_part(offdiag: Sequence[np.ndarray], X) -> np.ndarray:
    """``Y = sum_k X x_k Psi_k^off`` over the variable modes of ``X``."""
    Y = np.zeros(X.shape)
    for k, P in enumerate(offdiag):
        Y += mode_product(X, P, k)
    return Y


def penalty(offdiag: Sequence[np.ndarray], lambdas) -> float:
    lam = np.broadcast_to(np.asarray(lambdas, dtype=np.float64), (len(offdiag),))
    return float(sum(l * np.abs(P).sum() for l, P in zip(lam, offdiag)))


def objective(S: FactorSet, X, lambdas) -> float:
    """Penalized pseudo-likelihood of ``S`` on data ``X``."""
    X = _data(X, S.dims)
    if np.any(S.W <= 0):
        raise ValueError("W must be strictly positive")
    N = X.shape[-1]
    R = S.W[..., None] * X + regression_part(S.offdiag, X)
    return float(-N * np.log(S.W).sum() + 0.5 * np.sum(R * R) + penalty(S.offdiag, lambdas))


def soft_threshold(x, t):
    """``sign(x) * max(|x| - t, 0)``."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def offdiag_update(S: FactorSet, X, k: int, i: int, j: int, lam: float) -> float:
    """Exact minimizer of the objective in ``Psi_k[i, j] = Psi_k[j, i]``, all else fixed.

    Built from mode-k unfoldings of the full data tensor (observation mode
    included). If both slices ``i`` and ``j`` of ``X`` vanish the coordinate
    is undetermined; the current value is returned with a warning.
    """
    X = _data(X, S.dims)
    if not i < j:
        raise ValueError("need i < j")
    N = X.shape[-1]
    Xk = matricize(X, k)
    gram = Xk @ Xk.T / N
    den = gram[i, i] + gram[j, j]
    if den <= 0:
        warnings.warn(f"skipping coordinate ({k}, {i}, {j}): both slices are zero", RuntimeWarning)
        return float(S.offdiag[k][i, j])

    WXk = matricize(S.W[..., None] * X, k)
    loo = S.offdiag[k].copy()
    loo[i, j] = loo[j, i] = 0.0
    Zk = matricize(mode_product(X, loo, k), k)
    F = (WXk @ Xk.T)[i, j] + (WXk @ Xk.T)[j, i]
    F += (Xk @ Zk.T)[j, i] + (Xk @ Zk.T)[i, j]
    for l, P in enumerate(S.offdiag):
        if l != k:
            Vk = matricize(mode_product(X, P, l), k)
            F += (Xk @ Vk.T)[i, j] + (Xk @ Vk.T)[j, i]
    F = -F / N
    return float(soft_threshold(F, 2.0 * lam / N) / den)


def _positive_root(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # root of a w^2 + b w - 1 = 0, written to avoid cancellation for either sign of b
    disc = np.sqrt(b * b + 4.0 * a)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(b >= 0, 2.0 / (b + disc), (disc - b) / (2.0 * a))


def diag_update(S: FactorSet, X, w_floor: float = 1e-12, Y=None) -> np.ndarray:
    """Jointly minimize the objective over every entry of ``W``.

    With ``a = mean_s X^2`` and ``b = mean_s X*Y`` each entry is the positive
    root of ``a w^2 + b w - 1 = 0``. Variables with ``a == 0`` get ``w_floor``.
    """
    X = _data(X, S.dims)
    if Y is None:
        Y = regression_part(S.offdiag, X)
    a = np.mean(X * X, axis=-1)
    b = np.mean(X * Y, axis=-1)
    dead = a <= 0
    W = _positive_root(a, b)
    if dead.any():
        warnings.warn(f"{int(dead.sum())} variables are identically zero; W floored", RuntimeWarning)
        W = np.where(dead, w_floor, W)
    return W


def _check_standardized(X: np.ndarray) -> None:
    if np.max(np.abs(X.mean(axis=-1))) > 1e-8:
        warnings.warn("data do not look standardized (nonzero variable means)", RuntimeWarning)


def _sweep_numba(X, R, offdiag, grams, thresholds) -> tuple[float, int]:
    dims = X.shape[:-1]
    max_delta, skipped = 0.0, 0
    for k, P in enumerate(offdiag):
        before = int(np.prod(dims[:k]))
        shape3 = (before, dims[k], -1)
        d, s = _cd.sweep_mode(X.reshape(shape3), R.reshape(shape3), P, grams[k], thresholds[k])
        max_delta = max(max_delta, d)
        skipped += s
    return max_delta, skipped


def _sweep_python(S: FactorSet, X, lam) -> tuple[float, int]:
    max_delta, skipped = 0.0, 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for k, P in enumerate(S.offdiag):
            for i in range(P.shape[0] - 1):
                for j in range(i + 1, P.shape[0]):
                    new = offdiag_update(S, X, k, i, j, lam[k])
                    max_delta = max(max_delta, abs(new - P[i, j]))
                    P[i, j] = P[j, i] = new
    skipped = sum("skipping coordinate" in str(w.message) for w in caught)
    return max_delta, skipped


def fit(X, cfg: SolverConfig | None = None, init: FactorSet | None = None) -> FitReport:
    """Run coordinate descent on data ``X`` of shape ``(m_1, ..., m_K, N)``.

    Each sweep visits modes in ascending order and, within a mode, the
    pairs ``i < j`` lexicographically, then refreshes all of ``W`` at once.
    Iteration stops once the largest absolute parameter change in a sweep
    drops below ``cfg.tol``. By default the start is ``Psi_k^off = 0`` with
    ``W`` from one diagonal update; ``init`` overrides this.
    """
    cfg = cfg or SolverConfig()
    X = _data(X)
    dims, N, K = X.shape[:-1], X.shape[-1], X.ndim - 1
    _check_standardized(X)
    lam = cfg.mode_lambdas(K)

    if init is not None:
        S = init.copy()
        if S.dims != dims:
            raise ValueError(f"initial factors have dims {S.dims}, data {dims}")
    else:
        S = FactorSet.zeros(dims)
    if cfg.fixed_w is not None:
        S.W = np.array(cfg.fixed_w, dtype=np.float64).reshape(dims)
    elif init is None:
        S.W = diag_update(S, X, cfg.w_floor)

    Y = regression_part(S.offdiag, X)
    R = np.ascontiguousarray(S.W[..., None] * X + Y)
    grams = [np.einsum("ij,ij->i", Xk, Xk) for Xk in (matricize(X, k) for k in range(K))]
    thresholds = 2.0 * lam

    report = FitReport(S, [objective(S, X, lam)], [], 0, False)
    if cfg.record_path:
        report.path.append([P.copy() for P in S.offdiag])
        report.w_path.append(S.W.copy())

    for sweep in range(1, cfg.max_sweeps + 1):
        if cfg.engine == "numba":
            delta, skipped = _sweep_numba(X, R, S.offdiag, grams, thresholds)
        else:
            delta, skipped = _sweep_python(S, X, lam)
        Y = regression_part(S.offdiag, X)
        if cfg.fixed_w is None:
            W_new = diag_update(S, X, cfg.w_floor, Y=Y)
            delta = max(delta, float(np.max(np.abs(W_new - S.W))))
            S.W = W_new
        R = np.ascontiguousarray(S.W[..., None] * X + Y)
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(S.W))):
            raise NumericalError("non-finite parameters or residuals", sweep)

        report.sweeps = sweep
        report.skipped = skipped
        report.delta_trace.append(delta)
        report.objective_trace.append(objective(S, X, lam))
        if cfg.record_path:
            report.path.append([P.copy() for P in S.offdiag])
            report.w_path.append(S.W.copy())
        if delta < cfg.tol:
            report.converged = True
            break
    return report


def lambda_max(X, cfg: SolverConfig | None = None) -> float:
    """Smallest common penalty at which the default start is already optimal.

    Every off-diagonal coordinate stays at zero for ``lambda >= lambda_max``.
    """
    X = _data(X)
    K = X.ndim - 1
    S = FactorSet.zeros(X.shape[:-1])
    S.W = diag_update(S, X) if cfg is None or cfg.fixed_w is None else np.asarray(cfg.fixed_w)
    WX = S.W[..., None] * X
    out = 0.0
    for k in range(K):
        G = matricize(WX, k) @ matricize(X, k).T
        G = G + G.T
        np.fill_diagonal(G, 0.0)
        out = max(out, 0.5 * float(np.max(np.abs(G), initial=0.0)))
    return out


def reconstruct_omega(S: FactorSet, cap: int = MAX_DENSE) -> np.ndarray:
    """Dense ``(sum_k Psi_k^off embedded + diag(vec W))^2``."""
    dims = S.dims
    m = int(np.prod(dims))
    if m > cap:
        raise ValueError(f"dense materialization of size {m} exceeds cap {cap}")
    M = sum(embed(P, k, dims) for k, P in enumerate(S.offdiag))
    M = M + np.diag(S.W.ravel(order="F"))
    return M @ M
