"""Independent reference computations used only by the tests.

Nothing here calls the solver; objectives are evaluated by explicit loops
or dense matrices so they can check the coordinate-descent code paths.
"""

from __future__ import annotations

import itertools

import numpy as np

from syglasso.kron import embed
from syglasso.tensor import vectorize


def naive_objective(offdiag, W, X, lambdas) -> float:
    """Literal elementwise evaluation of the penalized pseudo-likelihood."""
    dims, N = X.shape[:-1], X.shape[-1]
    K = len(dims)
    lam = np.broadcast_to(np.asarray(lambdas, dtype=float), (K,))
    total = 0.0
    for idx in itertools.product(*(range(m) for m in dims)):
        total -= N * np.log(W[idx])
        for s in range(N):
            r = W[idx] * X[idx + (s,)]
            for k in range(K):
                for j in range(dims[k]):
                    if j != idx[k]:
                        other = idx[:k] + (j,) + idx[k + 1 :]
                        r += offdiag[k][idx[k], j] * X[other + (s,)]
            total += 0.5 * r * r
    for k in range(K):
        m = dims[k]
        for a in range(m):
            for b in range(m):
                if a != b:
                    total += lam[k] * abs(offdiag[k][a, b])
    return total


class DenseProblem:
    """The objective over ``(w, theta)`` with dense operators.

    ``theta`` lists the strict-upper-triangle entries of every mode factor,
    mode by mode in row-major order.
    """

    def __init__(self, X, lambdas):
        self.dims, self.N = X.shape[:-1], X.shape[-1]
        K = len(self.dims)
        self.lam = np.broadcast_to(np.asarray(lambdas, dtype=float), (K,))
        self.V = np.stack([vectorize(X[..., s]) for s in range(self.N)], axis=1)
        self.basis, self.pen = [], []
        for k, m in enumerate(self.dims):
            for i, j in zip(*np.triu_indices(m, 1)):
                E = np.zeros((m, m))
                E[i, j] = E[j, i] = 1.0
                self.basis.append(embed(E, k, self.dims))
                self.pen.append(2.0 * self.lam[k])
        self.basis = np.array(self.basis)
        self.pen = np.array(self.pen)
        self.m = self.V.shape[0]

    def operator(self, w, theta):
        return np.tensordot(theta, self.basis, axes=1) + np.diag(w)

    def smooth(self, w, theta):
        R = self.operator(w, theta) @ self.V
        f = -self.N * np.sum(np.log(w)) + 0.5 * np.sum(R * R)
        G = R @ self.V.T
        gw = -self.N / w + np.diag(G)
        gt = np.einsum("pab,ab->p", self.basis, G)
        return f, gw, gt

    def value(self, w, theta):
        return self.smooth(w, theta)[0] + float(self.pen @ np.abs(theta))

    def unpack(self, w, theta):
        offdiag, pos = [], 0
        for m in self.dims:
            P = np.zeros((m, m))
            n = m * (m - 1) // 2
            P[np.triu_indices(m, 1)] = theta[pos : pos + n]
            offdiag.append(P + P.T)
            pos += n
        # w is in vectorized (first-index-fastest) order
        return offdiag, w.reshape(self.dims, order="F")


def spg_minimize(X, lambdas, max_iter=200_000, tol=1e-11, w_min=1e-10):
    """Spectral projected gradient on ``theta = tp - tn`` with ``tp, tn >= 0``.

    Nonmonotone line search (Birgin, Martinez & Raydan). Starts from
    ``w = 1``, ``theta = 0`` and stops when the projected-gradient step is
    below ``tol``. Returns ``(offdiag, W, objective)``.
    """
    prob = DenseProblem(np.asarray(X, dtype=float), lambdas)
    n_t = prob.pen.size

    def split(z):
        return z[: prob.m], z[prob.m : prob.m + n_t], z[prob.m + n_t :]

    def f_and_grad(z):
        w, tp, tn = split(z)
        f, gw, gt = prob.smooth(w, tp - tn)
        f += float(prob.pen @ (tp + tn))
        return f, np.concatenate([gw, gt + prob.pen, -gt + prob.pen])

    lower = np.concatenate([np.full(prob.m, w_min), np.zeros(2 * n_t)])

    def project(z):
        return np.maximum(z, lower)

    z = np.concatenate([np.ones(prob.m), np.zeros(2 * n_t)])
    f, g = f_and_grad(z)
    history = [f]
    alpha = 1.0 / max(1.0, np.abs(g).max())
    for _ in range(max_iter):
        d = project(z - alpha * g) - z
        if np.abs(d).max() < tol * max(1.0, np.abs(z).max()):
            break
        f_ref = max(history[-10:])
        gd = float(g @ d)
        step = 1.0
        while True:
            z_new = z + step * d
            f_new, g_new = f_and_grad(z_new)
            if np.isfinite(f_new) and f_new <= f_ref + 1e-4 * step * gd:
                break
            step *= 0.5
            if step < 1e-20:
                break
        s, y = z_new - z, g_new - g
        sy = float(s @ y)
        alpha = float(s @ s) / sy if sy > 0 else 1e10
        alpha = min(max(alpha, 1e-12), 1e12)
        z, f, g = z_new, f_new, g_new
        history.append(f)
    w, tp, tn = split(z)
    offdiag, W = prob.unpack(w, tp - tn)
    return offdiag, W, prob.value(w, tp - tn)


def polish_newton(X, lambdas, offdiag, W, iters=50):
    """Newton steps on the smooth problem restricted to the nonzero pattern.

    Holds the zero set and signs of ``theta`` fixed (the active manifold of
    the l1 term) and solves the stationarity equations there.
    """
    prob = DenseProblem(np.asarray(X, dtype=float), lambdas)
    theta = np.concatenate([P[np.triu_indices(P.shape[0], 1)] for P in offdiag])
    w = np.asarray(W, dtype=float).ravel(order="F")
    active = theta != 0
    sign = np.sign(theta)
    B = prob.basis[active]
    D = [np.diag(e) for e in np.eye(prob.m)]
    cols = np.concatenate([np.array(D), B])  # derivative of the operator per free variable
    for _ in range(iters):
        f, gw, gt = prob.smooth(w, theta)
        g = np.concatenate([gw, gt[active] + prob.pen[active] * sign[active]])
        # Hessian of 1/2 sum ||M v||^2 is <C_a V, C_b V>; log term adds N / w^2
        CV = np.einsum("aij,jn->ain", cols, prob.V)
        H = np.einsum("ain,bin->ab", CV, CV)
        H[: prob.m, : prob.m] += np.diag(prob.N / w**2)
        step = np.linalg.solve(H, g)
        t = 1.0
        while np.any(w - t * step[: prob.m] <= 0):
            t *= 0.5
        w = w - t * step[: prob.m]
        theta[active] -= t * step[prob.m :]
        if np.abs(step).max() < 1e-14 * max(1.0, np.abs(w).max()):
            break
    return (*prob.unpack(w, theta), prob.value(w, theta))


def kkt_violation(X, lambdas, offdiag, W):
    """Largest violation of the first-order optimality conditions.

    Uses the dense gradient: zero coordinates need ``|g| <= 2 lambda``,
    nonzero ones ``g = -2 lambda sign``, and the ``W`` gradient must vanish.
    """
    prob = DenseProblem(np.asarray(X, dtype=float), lambdas)
    theta = np.concatenate([P[np.triu_indices(P.shape[0], 1)] for P in offdiag])
    w = np.asarray(W, dtype=float).ravel(order="F")
    _, gw, gt = prob.smooth(w, theta)
    zero = theta == 0
    v_zero = np.maximum(np.abs(gt[zero]) - prob.pen[zero], 0.0)
    v_nz = np.abs(gt[~zero] + prob.pen[~zero] * np.sign(theta[~zero]))
    return float(max(np.abs(gw).max(), v_zero.max(initial=0.0), v_nz.max(initial=0.0)))


def coordinate_derivative(objective_fn, offdiag, W, k, i, j, h=1e-6):
    """Central difference of ``objective_fn`` along the symmetric pair ``(i, j)`` of mode ``k``."""
    vals = []
    for t in (h, -h):
        P = [F.copy() for F in offdiag]
        P[k][i, j] += t
        P[k][j, i] += t
        vals.append(objective_fn(P, W))
    return (vals[0] - vals[1]) / (2 * h)


def w_derivative(objective_fn, offdiag, W, idx, h=1e-6):
    """Central difference of ``objective_fn`` along one entry of ``W``."""
    vals = []
    for t in (h, -h):
        V = W.copy()
        V[idx] += t
        vals.append(objective_fn(offdiag, V))
    return (vals[0] - vals[1]) / (2 * h)
