"""Kronecker sums and products of per-mode factors.

The apply form ``sum_k X x_k Psi_k`` is the reference definition of the
Kronecker sum. Dense materializations are arranged so that

    kron_sum_materialize(F) @ vectorize(X) == vectorize(kron_sum_apply(F, X))

under first-index-fastest vectorization, which puts the factor of the
*last* mode outermost: ``Psi_1 (+) Psi_2 = kron(I_2, Psi_1) + kron(Psi_2, I_1)``.

Apply-style functions accept tensors with extra trailing modes (for example
an observation mode) and act on the leading ``K`` modes only.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .tensor import as_tensor, mode_product, multi_mode_product

MAX_DENSE = 4096


def sym_factor(A, atol: float = 1e-12) -> np.ndarray:
    """Validate a square, numerically symmetric matrix and symmetrize it exactly."""
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"factor must be square, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if not np.allclose(A, A.T, rtol=0.0, atol=atol * scale):
        raise ValueError("factor is not symmetric")
    return 0.5 * (A + A.T)


def _factor_list(factors: Sequence) -> list[np.ndarray]:
    factors = [np.asarray(F, dtype=np.float64) for F in factors]
    if not factors:
        raise ValueError("need at least one factor")
    for F in factors:
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise ValueError(f"factor must be square, got shape {F.shape}")
    return factors


def mode_sizes(factors: Sequence) -> tuple[int, ...]:
    return tuple(np.shape(F)[0] for F in factors)


def _check_shape(factors: list[np.ndarray], X: np.ndarray) -> None:
    dims = mode_sizes(factors)
    if X.shape[: len(dims)] != dims:
        raise ValueError(f"tensor of shape {X.shape} does not match factor sizes {dims}")


def _check_cap(factors: Sequence, cap: int) -> int:
    m = int(np.prod(mode_sizes(factors)))
    if m > cap:
        raise ValueError(f"dense materialization of size {m} exceeds cap {cap}")
    return m


def kron_sum_apply(factors: Sequence, X) -> np.ndarray:
    """``sum_k X x_k Psi_k``."""
    factors = _factor_list(factors)
    X = as_tensor(X)
    _check_shape(factors, X)
    out = mode_product(X, factors[0], 0)
    for k in range(1, len(factors)):
        out += mode_product(X, factors[k], k)
    return out


def embed(F, k: int, dims: Sequence[int]) -> np.ndarray:
    """Dense ``m x m`` operator of ``X -> X x_k F`` on vectorized tensors."""
    before = int(np.prod(dims[:k]))
    after = int(np.prod(dims[k + 1 :]))
    return np.kron(np.eye(after), np.kron(F, np.eye(before)))


def kron_sum_materialize(factors: Sequence, cap: int = MAX_DENSE) -> np.ndarray:
    factors = _factor_list(factors)
    _check_cap(factors, cap)
    dims = mode_sizes(factors)
    return sum(embed(F, k, dims) for k, F in enumerate(factors))


def kron_product_materialize(factors: Sequence, cap: int = MAX_DENSE) -> np.ndarray:
    """Dense operator of ``X -> X x_1 Psi_1 ... x_K Psi_K``, i.e. ``Psi_K (x) ... (x) Psi_1``."""
    factors = _factor_list(factors)
    _check_cap(factors, cap)
    out = np.ones((1, 1))
    for F in factors:
        out = np.kron(F, out)
    return out


def squared_ks_precision(factors: Sequence, cap: int = MAX_DENSE) -> np.ndarray:
    """Dense ``(Psi_1 (+) ... (+) Psi_K)^2``."""
    M = kron_sum_materialize(factors, cap)
    return M @ M


def ks_eigen(factors: Sequence) -> tuple[list[np.ndarray], np.ndarray]:
    """Per-mode eigenvectors and the eigenvalue tensor of the Kronecker sum.

    Returns ``(U, lam)`` with ``Psi_k = U[k] diag(l_k) U[k]^T`` and
    ``lam[i_1, ..., i_K] = sum_k l_k[i_k]``.
    """
    factors = _factor_list(factors)
    U, lam = [], np.zeros(())
    for k, F in enumerate(factors):
        if not np.allclose(F, F.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(F).max())):
            raise np.linalg.LinAlgError(f"factor {k} is not symmetric")
        w, V = np.linalg.eigh(F)
        U.append(V)
        lam = np.add.outer(lam, w)
    return U, lam


def spectral_apply(U: Sequence[np.ndarray], values, X) -> np.ndarray:
    """``X -> U diag(values) U^T X`` with ``U = U_K (x) ... (x) U_1`` applied modewise.

    ``values`` has the shape of the leading modes of ``X``; with the
    eigenvalue tensor from :func:`ks_eigen` this reproduces
    :func:`kron_sum_apply`, with ``1 / lam`` it solves the Sylvester equation.
    """
    X = as_tensor(X)
    values = np.asarray(values, dtype=np.float64)
    extra = X.ndim - values.ndim
    Z = multi_mode_product(X, [V.T for V in U])
    Z = Z * values.reshape(values.shape + (1,) * extra)
    return multi_mode_product(Z, list(U))
