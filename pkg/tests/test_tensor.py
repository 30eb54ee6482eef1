import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from syglasso.tensor import (
    devectorize,
    fold,
    matricize,
    mode_product,
    multi_mode_product,
    vectorize,
)

shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)
finite = st.floats(-1e6, 1e6, allow_nan=False)


@st.composite
def tensors(draw):
    shape = draw(shapes)
    return draw(hnp.arrays(np.float64, shape, elements=finite))


def test_vectorize_runs_first_index_fastest():
    X = np.array([[1.0, 3.0], [2.0, 4.0]])
    np.testing.assert_array_equal(vectorize(X), [1, 2, 3, 4])


def test_vectorize_singleton():
    assert vectorize(np.full((1, 1, 1), 7.5)).tolist() == [7.5]


def test_devectorize_roundtrip_2x3x2(rng):
    X = rng.standard_normal((2, 3, 2))
    np.testing.assert_array_equal(devectorize(vectorize(X), X.shape), X)


def test_vectorize_index_formula(rng):
    X = rng.standard_normal((2, 3, 4))
    v = vectorize(X)
    for i, j, k in np.ndindex(X.shape):
        assert v[i + 2 * j + 6 * k] == X[i, j, k]


@given(tensors())
def test_vectorize_roundtrip_is_exact(X):
    np.testing.assert_array_equal(devectorize(vectorize(X), X.shape), X)


def test_matricize_matrix():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(matricize(X, 0), X)
    np.testing.assert_array_equal(matricize(X, 1), X.T)


def test_matricize_third_mode_of_cube():
    X = devectorize(np.arange(1.0, 9.0), (2, 2, 2))
    np.testing.assert_array_equal(matricize(X, 2), [[1, 2, 3, 4], [5, 6, 7, 8]])


def test_matricize_kolda_column_decoding(rng):
    dims = (2, 3, 4, 2)
    X = rng.standard_normal(dims)
    for k in range(len(dims)):
        M = matricize(X, k)
        for idx in np.ndindex(dims):
            c, stride = 0, 1
            for l in range(len(dims)):
                if l != k:
                    c += idx[l] * stride
                    stride *= dims[l]
            assert M[idx[k], c] == X[idx]


@given(tensors(), st.data())
def test_fold_inverts_matricize(X, data):
    k = data.draw(st.integers(0, X.ndim - 1))
    np.testing.assert_array_equal(fold(matricize(X, k), k, X.shape), X)


def test_matricize_bad_mode():
    with pytest.raises(IndexError):
        matricize(np.zeros((2, 2)), 2)


def test_mode_product_identity(rng):
    X = rng.standard_normal((3, 2, 4))
    for k in range(3):
        np.testing.assert_array_equal(mode_product(X, np.eye(X.shape[k]), k), X)


def test_mode_product_row_swap():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(mode_product(X, swap, 0), [[3, 4], [1, 2]])


def test_mode_product_matches_dense_kronecker(rng):
    X = rng.standard_normal((3, 2))
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((2, 2))
    np.testing.assert_allclose(
        vectorize(mode_product(X, A, 0)), np.kron(np.eye(2), A) @ vectorize(X), atol=1e-12
    )
    np.testing.assert_allclose(
        vectorize(mode_product(X, B, 1)), np.kron(B, np.eye(3)) @ vectorize(X), atol=1e-12
    )


def test_mode_product_is_unfolded_product(rng):
    X = rng.standard_normal((3, 4, 2))
    for k in range(3):
        A = rng.standard_normal((X.shape[k],) * 2)
        np.testing.assert_allclose(
            matricize(mode_product(X, A, k), k), A @ matricize(X, k), rtol=1e-12, atol=1e-12
        )


def test_mode_product_dimension_mismatch():
    with pytest.raises(ValueError):
        mode_product(np.zeros((2, 3)), np.eye(3), 0)


def test_multi_mode_product_identity_and_diagonal(rng):
    X = rng.standard_normal((3, 4))
    np.testing.assert_array_equal(multi_mode_product(X, [np.eye(3), np.eye(4)]), X)
    d1, d2 = rng.standard_normal(3), rng.standard_normal(4)
    np.testing.assert_allclose(
        multi_mode_product(X, [np.diag(d1), np.diag(d2)]), X * np.outer(d1, d2), rtol=1e-14
    )


def test_multi_mode_product_order_free(rng):
    X = rng.standard_normal((3, 4, 5))
    A = [rng.standard_normal((m, m)) for m in X.shape]
    a = multi_mode_product(X, A)
    b = multi_mode_product(X, [A[2], A[0], A[1]], modes=[2, 0, 1])
    assert np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(a)


@settings(max_examples=50)
@given(tensors(), st.data())
def test_distinct_mode_products_commute(X, data):
    if X.ndim < 2:
        return
    k, l = data.draw(st.lists(st.integers(0, X.ndim - 1), min_size=2, max_size=2, unique=True))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    A = rng.standard_normal((X.shape[k],) * 2)
    B = rng.standard_normal((X.shape[l],) * 2)
    lhs = mode_product(mode_product(X, A, k), B, l)
    rhs = mode_product(mode_product(X, B, l), A, k)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(np.linalg.norm(lhs), 1e-300) + 1e-300
