"""Dense tensor primitives.

Tensors are plain ``numpy.ndarray`` objects of dtype float64. All modes are
0-based in this API. Vectorization runs the first index fastest, i.e.
``vec(X)[i_0 + m_0 * i_1 + m_0 * m_1 * i_2 + ...] == X[i_0, i_1, i_2, ...]``,
which is column-major (Fortran) order.

The mode-k unfolding follows Kolda & Bader: entry ``(i_k, c)`` of
``matricize(X, k)`` is the element whose k-th index is ``i_k`` and whose
remaining indices are decoded from ``c`` with the lowest-numbered remaining
mode varying fastest::

    c = sum_{l != k} i_l * prod_{n < l, n != k} m_n
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def as_tensor(X) -> np.ndarray:
    """Return ``X`` as a float64 array with every mode size >= 1."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        raise ValueError("a tensor needs at least one mode")
    if any(s < 1 for s in X.shape):
        raise ValueError(f"mode sizes must be positive, got {X.shape}")
    return X


def _check_mode(X: np.ndarray, k: int) -> None:
    if not 0 <= k < X.ndim:
        raise IndexError(f"mode {k} out of range for a {X.ndim}-mode tensor")


def vectorize(X) -> np.ndarray:
    """Stack the entries of ``X`` into a vector, first index fastest."""
    return as_tensor(X).ravel(order="F")


def devectorize(v, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=np.float64)
    shape = tuple(int(s) for s in shape)
    if v.ndim != 1 or v.size != int(np.prod(shape)):
        raise ValueError(f"cannot reshape vector of size {v.size} to {shape}")
    return v.reshape(shape, order="F")


def matricize(X, k: int) -> np.ndarray:
    """Mode-k unfolding, shape ``(m_k, m / m_k)``."""
    X = as_tensor(X)
    _check_mode(X, k)
    return np.moveaxis(X, k, 0).reshape(X.shape[k], -1, order="F")


def fold(M, k: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`matricize` for a tensor of the given shape."""
    shape = tuple(int(s) for s in shape)
    if not 0 <= k < len(shape):
        raise IndexError(f"mode {k} out of range for a {len(shape)}-mode tensor")
    M = np.asarray(M, dtype=np.float64)
    rest = shape[:k] + shape[k + 1 :]
    if M.shape != (shape[k], int(np.prod(rest))):
        raise ValueError(f"matrix of shape {M.shape} does not unfold {shape} along mode {k}")
    return np.moveaxis(M.reshape((shape[k],) + rest, order="F"), 0, k)


def mode_product(X, A, k: int) -> np.ndarray:
    """k-mode product ``X x_k A`` with a square ``m_k x m_k`` matrix.

    ``(X x_k A)[..., j, ...] = sum_i X[..., i, ...] * A[j, i]``.
    """
    X = as_tensor(X)
    _check_mode(X, k)
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (X.shape[k], X.shape[k]):
        raise ValueError(
            f"matrix of shape {A.shape} cannot multiply mode {k} of size {X.shape[k]}"
        )
    return np.moveaxis(np.tensordot(A, X, axes=(1, k)), 0, k)


def multi_mode_product(X, matrices: Sequence, modes: Sequence[int] | None = None) -> np.ndarray:
    """Apply ``X x_{modes[0]} A_0 x_{modes[1]} A_1 ...``.

    With ``modes=None`` the i-th matrix multiplies mode i. Products along
    distinct modes commute, so the order only matters up to rounding.
    """
    X = as_tensor(X)
    if modes is None:
        modes = range(len(matrices))
    modes = list(modes)
    if len(modes) != len(matrices):
        raise ValueError("need one mode index per matrix")
    for A, k in zip(matrices, modes):
        X = mode_product(X, A, k)
    return X
