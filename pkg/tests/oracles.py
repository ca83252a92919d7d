"""Brute-force reference minimizers used by the solver tests.

Objectives here are written independently of the package code and evaluated
on whole batches of candidate points (shape ``(K, d)``).
"""

import itertools

import numpy as np


def grid_minimize(f, dim, lo=-3.0, hi=3.0, coarse=25, local=9, levels=22, shrink=3.0):
    """Exhaustive grid on ``[lo, hi]^dim`` followed by repeated local zoom grids.

    Each zoom evaluates a full ``local^dim`` grid centred on the incumbent, so
    descent directions off the coordinate axes are sampled too. Returns
    ``(x_best, f_best)``.
    """
    axis = np.linspace(lo, hi, coarse)
    pts = np.array(list(itertools.product(axis, repeat=dim)))
    vals = _batched(f, pts)
    k = int(np.argmin(vals))
    x, fx = pts[k], vals[k]
    h = (hi - lo) / (coarse - 1)
    offsets = np.array(list(itertools.product(np.arange(local) - local // 2, repeat=dim)), dtype=float)
    for _ in range(2):
        step = h
        for _ in range(levels):
            cand = x + step * offsets
            cv = f(cand)
            j = int(np.argmin(cv))
            if cv[j] < fx:
                x, fx = cand[j], cv[j]
            step /= shrink
    return x, float(fx)


def _batched(f, pts, size=50_000):
    return np.concatenate([f(pts[i:i + size]) for i in range(0, len(pts), size)])


def _loss(X, y, T):
    n = X.shape[0]
    R = y[None, :] - T @ X.T
    return (R**2).sum(axis=1) / (2 * n)


def lasso(X, y, lam):
    return lambda T: _loss(X, y, T) + lam * np.abs(T).sum(axis=1)


def ridge(X, y, lam):
    return lambda T: _loss(X, y, T) + 0.5 * lam * (T**2).sum(axis=1)


def elastic_net(X, y, l1, l2):
    return lambda T: _loss(X, y, T) + l1 * np.abs(T).sum(axis=1) + 0.5 * l2 * (T**2).sum(axis=1)


def fused(X, y, l1, l2, order):
    order = list(order)
    return lambda T: (
        _loss(X, y, T)
        + l1 * np.abs(T).sum(axis=1)
        + l2 * np.abs(np.diff(T[:, order], axis=1)).sum(axis=1)
    )


def sparse_group(X, y, labels, l_group, l1):
    labels = np.asarray(labels)
    blocks = [np.flatnonzero(labels == g) for g in np.unique(labels)]

    def f(T):
        pen = sum(np.sqrt(len(b)) * np.sqrt((T[:, b] ** 2).sum(axis=1)) for b in blocks)
        return _loss(X, y, T) + l_group * pen + l1 * np.abs(T).sum(axis=1)

    return f


def paired_two_genes(x1, x2, lam):
    """Variables ``(a, b)``: a = coefficient of gene 1 for gene 2, b the reverse."""
    n = len(x1)

    def f(T):
        a, b = T[:, 0], T[:, 1]
        r2 = x2[None, :] - a[:, None] * x1[None, :]
        r1 = x1[None, :] - b[:, None] * x2[None, :]
        return ((r1**2).sum(axis=1) + (r2**2).sum(axis=1)) / (2 * n) + lam * np.hypot(a, b)

    return f


def hierarchical_two_predictors(X, y, lam, lam_main):
    """Variables ``(b1, b2, phi)`` with ``phi`` the single interaction coefficient.

    For fixed ``b`` the cheapest split into ``b+ - b-`` meeting the budget
    ``|phi| <= b+_j + b-_j`` costs ``max(|b_j|, |phi|)``.
    """
    n = X.shape[0]
    z = X[:, 0] * X[:, 1]

    def f(T):
        b1, b2, phi = T[:, 0], T[:, 1], T[:, 2]
        fit = b1[:, None] * X[None, :, 0] + b2[:, None] * X[None, :, 1] + phi[:, None] * z[None, :]
        loss = ((y[None, :] - fit) ** 2).sum(axis=1) / (2 * n)
        budget = np.maximum(np.abs(b1), np.abs(phi)) + np.maximum(np.abs(b2), np.abs(phi))
        return loss + lam_main * budget + lam * np.abs(phi)

    return f


def standardize_columns(X):
    Z = X - X.mean(axis=0)
    return Z / np.sqrt((Z**2).mean(axis=0))


def hierarchical(X, y, lam, lam_main):
    """Variables ``(b_1..b_m, phi_12, phi_13, ..., phi_(m-1)m)``, pairs in row-major order.

    The budget split costs ``max(|b_j|, sum_k |phi_jk|)`` per predictor, the
    smallest ``b+_j + b-_j`` allowed for that ``b_j``.
    """
    n, m = X.shape
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    Z = np.column_stack([X[:, i] * X[:, j] for i, j in pairs])
    F = np.hstack([X, Z])

    def f(T):
        fit = T @ F.T
        loss = ((y[None, :] - fit) ** 2).sum(axis=1) / (2 * n)
        row = np.zeros((T.shape[0], m))
        for k, (i, j) in enumerate(pairs):
            a = np.abs(T[:, m + k])
            row[:, i] += a
            row[:, j] += a
        budget = np.maximum(np.abs(T[:, :m]), row).sum(axis=1)
        return loss + lam_main * budget + lam * np.abs(T[:, m:]).sum(axis=1)

    return f


def paired(X, lam):
    """Joint paired objective over the off-diagonal entries of ``Theta`` (row-major order)."""
    n, p = X.shape
    cells = [(i, j) for i in range(p) for j in range(p) if i != j]
    pos = {c: k for k, c in enumerate(cells)}

    def f(T):
        total = np.zeros(T.shape[0])
        for j in range(p):
            pred = sum(T[:, pos[(i, j)], None] * X[None, :, i] for i in range(p) if i != j)
            total += ((X[None, :, j] - pred) ** 2).sum(axis=1) / (2 * n)
        for i in range(p):
            for j in range(i + 1, p):
                total += lam * np.hypot(T[:, pos[(i, j)]], T[:, pos[(j, i)]])
        return total

    return f
