"""Ground-truth factors and data generation.

AR1 and Star-Block graphs are specified through their covariance ``A``; the
factor returned is the precision ``A^{-1}``, which carries the sparse graph.
Erdos-Renyi factors are built directly as precision matrices.

Sampling randomness: the noise for observation ``s`` is drawn from its own
``PCG64`` stream, the ``s``-th child of ``numpy.random.SeedSequence(seed)``,
reading ``m`` standard normals in first-index-fastest order. Datasets are
therefore reproducible from ``(seed, n_obs)`` and a prefix of observations
does not depend on how many more are drawn.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .kron import ks_eigen, mode_sizes, spectral_apply
from .tensor import devectorize

GRAPH_KINDS = ("ar1", "star_block", "erdos_renyi")


def gen_ar1(m: int, rho: float) -> np.ndarray:
    """Precision of the AR(1) covariance ``rho**|i - j|`` (tridiagonal)."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if m < 1:
        raise ValueError("m must be positive")
    s = 1.0 / (1.0 - rho * rho)
    Psi = np.zeros((m, m))
    if m == 1:
        Psi[0, 0] = 1.0
        return Psi
    idx = np.arange(m)
    Psi[idx, idx] = (1.0 + rho * rho) * s
    Psi[0, 0] = Psi[-1, -1] = s
    Psi[idx[:-1], idx[1:]] = Psi[idx[1:], idx[:-1]] = -rho * s
    return Psi


def star_block_covariance(m: int, block_size: int, rho: float) -> np.ndarray:
    """Block-diagonal covariance whose blocks have star-shaped precision.

    Within a block the hub is the first index; hub-leaf covariances are
    ``rho`` and leaf-leaf covariances ``rho**2``.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if block_size < 1 or m % block_size:
        raise ValueError(f"block_size {block_size} must divide m = {m}")
    B = np.full((block_size, block_size), rho * rho)
    B[0, :] = B[:, 0] = rho
    np.fill_diagonal(B, 1.0)
    return np.kron(np.eye(m // block_size), B)


def gen_star_block(m: int, block_size: int, rho: float) -> np.ndarray:
    """Precision of :func:`star_block_covariance`, with exact zeros off the stars."""
    A = star_block_covariance(m, block_size, rho)
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"star-block covariance is not positive definite for rho={rho}") from exc
    # leaf_l = rho * hub + sqrt(1 - rho^2) * noise_l inverts in closed form
    s = 1.0 / (1.0 - rho * rho)
    b = block_size
    P = np.zeros((b, b))
    np.fill_diagonal(P, s)
    P[0, 0] = 1.0 + (b - 1) * rho * rho * s
    P[0, 1:] = P[1:, 0] = -rho * s
    return np.kron(np.eye(m // b), P)


def gen_erdos_renyi(m: int, d: int, seed=None) -> np.ndarray:
    """Diagonally dominant precision with ``d`` random edges.

    Starts from ``0.25 I``; each edge ``(i, j)`` gets a weight
    ``psi ~ U[0.6, 0.8]`` subtracted off the diagonal and added to both
    diagonal entries. Edges are distinct pairs drawn uniformly from the
    strict upper triangle.
    """
    n_pairs = m * (m - 1) // 2
    if not 0 <= d <= n_pairs:
        raise ValueError(f"edge count {d} outside [0, {n_pairs}]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(m, 1)
    picks = rng.choice(n_pairs, size=d, replace=False)
    weights = rng.uniform(0.6, 0.8, size=d)
    A = 0.25 * np.eye(m)
    for p, psi in zip(picks, weights):
        i, j = iu[p], ju[p]
        A[i, j] -= psi
        A[j, i] = A[i, j]
        A[i, i] += psi
        A[j, j] += psi
    return A


@dataclass(frozen=True)
class GraphSpec:
    """One mode's ground-truth graph.

    ``rho`` is used by AR1 and Star-Block, ``block_size`` by Star-Block,
    ``edges`` and ``seed`` by Erdos-Renyi.
    """

    kind: str
    m: int
    rho: float = 0.6
    block_size: int = 1
    edges: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}; expected one of {GRAPH_KINDS}")
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.kind in ("ar1", "star_block") and not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.kind == "star_block" and (self.block_size < 1 or self.m % self.block_size):
            raise ValueError(f"block_size {self.block_size} must divide m = {self.m}")
        if self.kind == "erdos_renyi" and not 0 <= self.edges <= self.m * (self.m - 1) // 2:
            raise ValueError(f"edge count {self.edges} out of range for m = {self.m}")

    def build(self) -> np.ndarray:
        if self.kind == "ar1":
            return gen_ar1(self.m, self.rho)
        if self.kind == "star_block":
            return gen_star_block(self.m, self.block_size, self.rho)
        return gen_erdos_renyi(self.m, self.edges, self.seed)


def _noise(dims: tuple[int, ...], n_obs: int, seed) -> np.ndarray:
    m = int(np.prod(dims))
    T = np.empty(dims + (n_obs,))
    children = np.random.SeedSequence(seed).spawn(n_obs)
    for s, child in enumerate(children):
        T[..., s] = devectorize(np.random.Generator(np.random.PCG64(child)).standard_normal(m), dims)
    return T


def sample_sylvester(factors: Sequence, n_obs: int, seed=None, return_noise: bool = False):
    """Draw ``n_obs`` tensors solving ``sum_k X x_k Psi_k = T`` for white ``T``.

    Returns an array of shape ``(m_1, ..., m_K, n_obs)``, so that
    ``vec(X) ~ N(0, (Psi_1 (+) ... (+) Psi_K)^{-2})``. With
    ``return_noise=True`` the noise tensor is returned as well.
    """
    if n_obs < 1:
        raise ValueError("n_obs must be positive")
    U, lam = ks_eigen(factors)
    if lam.min() <= 0:
        raise ValueError(
            f"Kronecker sum is not positive definite (smallest eigenvalue {lam.min():.3g})"
        )
    T = _noise(mode_sizes(factors), n_obs, seed)
    X = spectral_apply(U, 1.0 / lam, T)
    return (X, T) if return_noise else X


def sample_precision(Omega, dims: Sequence[int], n_obs: int, seed=None) -> np.ndarray:
    """Draw ``vec(X) ~ N(0, Omega^{-1})`` through a dense Cholesky factor of ``Omega``.

    Used for the Kronecker-sum and Kronecker-product reference models.
    """
    dims = tuple(int(s) for s in dims)
    Omega = np.asarray(Omega, dtype=np.float64)
    m = int(np.prod(dims))
    if Omega.shape != (m, m):
        raise ValueError(f"precision of shape {Omega.shape} does not match dims {dims}")
    try:
        L = np.linalg.cholesky(Omega)
    except np.linalg.LinAlgError as exc:
        raise ValueError("precision matrix is not positive definite") from exc
    Z = _noise(dims, n_obs, seed).reshape(m, n_obs, order="F")
    return solve_triangular(L.T, Z, lower=False).reshape(dims + (n_obs,), order="F")


def standardize(X) -> np.ndarray:
    """Center and scale every variable across the observation (last) mode.

    Scales by the standard deviation with divisor ``N`` (``ddof=0``), so each
    standardized variable has unit mean square. Constant variables are
    centered but left unscaled, and their positions are reported through
    :mod:`warnings`.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim < 2 or X.shape[-1] < 2:
        raise ValueError("standardization needs at least two observations in the last mode")
    Z = X - X.mean(axis=-1, keepdims=True)
    sd = Z.std(axis=-1, keepdims=True)
    const = sd[..., 0] == 0
    if const.any():
        where = [tuple(int(i) for i in p) for p in np.argwhere(const)]
        warnings.warn(f"constant variables left unscaled at positions {where}", RuntimeWarning)
    return Z / np.where(sd == 0, 1.0, sd)
