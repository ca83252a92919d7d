"""Compiled inner loops. All kernels are single-threaded and sweep in a fixed order."""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(**_JIT)
def cd_elastic_net(XT, y, l1, l2, beta, tol, max_iter):
    """Cyclic coordinate descent for (1/2n)||y - Xb||^2 + l1|b|_1 + (l2/2)|b|^2.

    ``XT`` is the transposed design (one predictor per row). ``beta`` is
    updated in place and used as the warm start.
    """
    m, n = XT.shape
    r = y - XT.T @ beta
    sq = np.empty(m)
    for j in range(m):
        sq[j] = XT[j] @ XT[j] / n
    it = 0
    prev = np.inf
    while it < max_iter:
        it += 1
        max_delta = 0.0
        step = 0.0
        for j in range(m):
            if sq[j] == 0.0:
                beta[j] = 0.0
                continue
            old = beta[j]
            rho = XT[j] @ r / n + sq[j] * old
            new = soft(rho, l1) / (sq[j] + l2)
            if new != old:
                r -= (new - old) * XT[j]
                d = abs(new - old)
                step += d * d
                if d > max_delta:
                    max_delta = d
            beta[j] = new
        step = np.sqrt(step)
        if max_delta < tol:
            # sweeps contract linearly near the optimum; with rate q the
            # remaining distance is about step * q / (1 - q), which must sit
            # well inside tol relative to the coefficient norm
            q = step / prev
            if step == 0.0 or (q < 1.0 and step * q < 0.5 * tol * (1.0 - q) * np.sqrt(beta @ beta)):
                return it, True
        prev = step
    return it, False


@njit(**_JIT)
def bcd_sparse_group(XT, y, starts, weights, lipschitz, l_group, l1, beta, tol, max_iter):
    """Block coordinate descent for the sparse-group penalty.

    Rows of the transposed design ``XT`` are arranged so that group ``g``
    occupies ``starts[g]:starts[g + 1]``. Each block takes one majorized proximal step
    with step ``1 / lipschitz[g]``; the block prox is an elementwise soft
    threshold followed by a group soft threshold.
    """
    m, n = XT.shape
    n_groups = starts.shape[0] - 1
    r = y - XT.T @ beta
    it = 0
    while it < max_iter:
        it += 1
        max_delta = 0.0
        for g in range(n_groups):
            s = starts[g]
            e = starts[g + 1]
            L = lipschitz[g]
            if L == 0.0:
                for j in range(s, e):
                    beta[j] = 0.0
                continue
            Xg = XT[s:e]
            grad = Xg @ r / n
            v = np.empty(e - s)
            for k in range(e - s):
                v[k] = soft(beta[s + k] + grad[k] / L, l1 / L)
            nv = np.sqrt(v @ v)
            thr = l_group * weights[g] / L
            if nv <= thr:
                scale = 0.0
            else:
                scale = 1.0 - thr / nv
            delta = np.empty(e - s)
            changed = False
            for k in range(e - s):
                new = scale * v[k]
                delta[k] = new - beta[s + k]
                if delta[k] != 0.0:
                    changed = True
                    d = abs(delta[k])
                    if d > max_delta:
                        max_delta = d
                beta[s + k] = new
            if changed:
                for k in range(e - s):
                    if delta[k] != 0.0:
                        r -= delta[k] * Xg[k]
        if max_delta < tol:
            return it, True
    return it, False


@njit(**_JIT)
def bcd_paired(XT, lam, theta, tol, max_iter):
    """Block coordinate descent over unordered gene pairs.

    ``XT`` holds one gene per row. ``theta[i, j]`` is the coefficient of gene
    ``i`` in the regression of gene ``j``; the block ``(theta[i, j],
    theta[j, i])`` is shrunk jointly.
    """
    p, n = XT.shape
    RT = XT - theta.T @ XT
    sq = np.empty(p)
    for j in range(p):
        sq[j] = XT[j] @ XT[j] / n
    it = 0
    while it < max_iter:
        it += 1
        max_delta = 0.0
        for i in range(p):
            for j in range(i + 1, p):
                L = max(sq[i], sq[j])
                if L == 0.0:
                    theta[i, j] = 0.0
                    theta[j, i] = 0.0
                    continue
                a_old = theta[i, j]
                b_old = theta[j, i]
                va = a_old + XT[i] @ RT[j] / (n * L)
                vb = b_old + XT[j] @ RT[i] / (n * L)
                nv = np.sqrt(va * va + vb * vb)
                thr = lam / L
                if nv <= thr:
                    a_new = 0.0
                    b_new = 0.0
                else:
                    scale = 1.0 - thr / nv
                    a_new = scale * va
                    b_new = scale * vb
                if a_new != a_old:
                    RT[j] -= (a_new - a_old) * XT[i]
                if b_new != b_old:
                    RT[i] -= (b_new - b_old) * XT[j]
                theta[i, j] = a_new
                theta[j, i] = b_new
                d = max(abs(a_new - a_old), abs(b_new - b_old))
                if d > max_delta:
                    max_delta = d
        if max_delta < tol:
            return it, True
    return it, False


@njit(**_JIT)
def tv_denoise(y, lam):
    """Exact solution of min_b 1/2 ||y - b||^2 + lam * sum |b_i - b_{i-1}|.

    Dynamic programming over the piecewise-linear derivative of the forward
    messages; linear time.
    """
    n = y.shape[0]
    beta = np.empty(n)
    if n == 0:
        return beta
    if n == 1 or lam <= 0.0:
        beta[:] = y
        return beta

    x = np.empty(2 * n)
    a = np.empty(2 * n)
    b = np.empty(2 * n)
    tm = np.empty(n - 1)
    tp = np.empty(n - 1)

    l = n - 1
    r = n
    tm[0] = -lam + y[0]
    tp[0] = lam + y[0]
    x[l] = tm[0]
    x[r] = tp[0]
    a[l] = 1.0
    b[l] = -y[0] + lam
    a[r] = -1.0
    b[r] = y[0] + lam
    afirst = 1.0
    bfirst = -lam - y[1]
    alast = -1.0
    blast = -lam + y[1]

    for k in range(1, n - 1):
        lo = l
        while lo <= r:
            if afirst * x[lo] + bfirst > -lam:
                break
            afirst += a[lo]
            bfirst += b[lo]
            lo += 1
        hi = r
        while hi >= lo:
            if -alast * x[hi] - blast < lam:
                break
            alast += a[hi]
            blast += b[hi]
            hi -= 1
        tm[k] = (-lam - bfirst) / afirst
        tp[k] = (lam + blast) / (-alast)
        l = lo - 1
        r = hi + 1
        x[l] = tm[k]
        x[r] = tp[k]
        a[l] = afirst
        b[l] = bfirst + lam
        a[r] = alast
        b[r] = blast + lam
        afirst = 1.0
        bfirst = -lam - y[k + 1]
        alast = -1.0
        blast = -lam + y[k + 1]

    lo = l
    while lo <= r:
        if afirst * x[lo] + bfirst > 0:
            break
        afirst += a[lo]
        bfirst += b[lo]
        lo += 1
    beta[n - 1] = -bfirst / afirst

    for k in range(n - 2, -1, -1):
        if beta[k + 1] > tp[k]:
            beta[k] = tp[k]
        elif beta[k + 1] < tm[k]:
            beta[k] = tm[k]
        else:
            beta[k] = beta[k + 1]
    return beta


@njit(**_JIT)
def fused_prox(v, order, l1, l2):
    """Prox of l1 * |z|_1 + l2 * TV(z[order]): TV denoising then soft threshold."""
    m = v.shape[0]
    w = np.empty(m)
    for k in range(m):
        w[k] = v[order[k]]
    w = tv_denoise(w, l2)
    z = np.empty(m)
    for k in range(m):
        z[order[k]] = soft(w[k], l1)
    return z


@njit(**_JIT)
def admm_fused(solve_mat, Xty, order, l1, l2, rho, theta, z, u, tol, max_iter):
    """ADMM for (1/2n)||y - X t||^2 + l1 |t|_1 + l2 TV(t[order]).

    ``solve_mat`` is ``(X'X/n + rho I)^-1`` and ``Xty`` is ``X'y/n``.
    ``theta``, ``z`` and ``u`` (scaled dual) are updated in place.
    """
    it = 0
    while it < max_iter:
        it += 1
        theta[:] = solve_mat @ (Xty + rho * (z - u))
        z_old = z.copy()
        z[:] = fused_prox(theta + u, order, l1 / rho, l2 / rho)
        u += theta - z
        primal = np.max(np.abs(theta - z))
        dual = rho * np.max(np.abs(z - z_old))
        if primal < tol and dual < tol:
            return it, True
    return it, False


@njit(**_JIT)
def _budget_gap(mu, ac, alpha_p, alpha_m, l_main, l_int, rho):
    """|t(mu)|_1 - bp(mu) - bm(mu); decreasing in mu."""
    s = 0.0
    thr = (l_int + mu) / rho
    for k in range(ac.shape[0]):
        if ac[k] > thr:
            s += ac[k] - thr
    s -= max(0.0, alpha_p - (l_main - mu) / rho)
    s -= max(0.0, alpha_m - (l_main - mu) / rho)
    return s


RELAX = 1.6


@njit(**_JIT)
def _row_budget_prox(alpha_p, alpha_m, c, j, l_main, l_int, rho, ac, bps, t):
    """Prox of one hierarchy row, written into ``t``; returns ``(bp, bm)``.

    Minimizes ``l_main (bp + bm) + l_int |t|_1 + rho/2 [(bp - alpha_p)^2 +
    (bm - alpha_m)^2 + |t - c|^2]`` over ``bp, bm >= 0`` and ``t`` with
    ``t[j] = 0`` subject to ``|t|_1 <= bp + bm``. The multiplier ``mu`` of the
    budget constraint is the root of a decreasing piecewise-linear function,
    located exactly from its breakpoints. ``ac`` and ``bps`` are scratch
    buffers of length ``m`` and ``m + 2``.
    """
    m = c.shape[0]
    for k in range(m):
        ac[k] = abs(c[k])
    ac[j] = 0.0

    mu = 0.0
    h0 = _budget_gap(0.0, ac, alpha_p, alpha_m, l_main, l_int, rho)
    if h0 > 0.0:
        nb = 0
        for k in range(m):
            v = rho * ac[k] - l_int
            if v > 0.0:
                bps[nb] = v
                nb += 1
        for a_ in (alpha_p, alpha_m):
            v = l_main - rho * a_
            if v > 0.0:
                bps[nb] = v
                nb += 1
        bps[:nb].sort()
        lo = 0.0
        h_lo = h0
        mu = -1.0
        for k in range(nb):
            hk = _budget_gap(bps[k], ac, alpha_p, alpha_m, l_main, l_int, rho)
            if hk <= 0.0:
                if hk == 0.0:
                    mu = bps[k]
                else:
                    mu = lo + (bps[k] - lo) * h_lo / (h_lo - hk)
                break
            lo = bps[k]
            h_lo = hk
        if mu < 0.0:
            # unreachable: at the last breakpoint t == 0, so the gap is <= 0
            mu = lo

    thr = (l_int + mu) / rho
    for k in range(m):
        t[k] = soft(c[k], thr) if k != j else 0.0
    bp = max(0.0, alpha_p - (l_main - mu) / rho)
    bm = max(0.0, alpha_m - (l_main - mu) / rho)
    return bp, bm


@njit(**_JIT)
def admm_hierarchical(
    W, y, WQ, evals, rho, l_main, l_int, pairs_i, pairs_j,
    bp, bm, T, up, um, U, tol, max_iter,
):
    """ADMM for the all-pairs lasso with strong hierarchy.

    Block A holds ``(bp_a, bm_a, phi)`` and carries the squared loss; block B
    holds ``(bp, bm, T)`` with the penalties and the per-row budget
    constraints ``|T_j|_1 <= bp_j + bm_j``. Consensus ``phi = T`` makes the
    B-block interaction matrix symmetric at convergence.

    ``W = [X | Z]`` with ``Z[:, k] = X[:, pairs_i[k]] * X[:, pairs_j[k]]``.
    With ``D0 = diag(1/2 * 1_m, 2 * 1_q)`` and ``W D0^-1 W' = Q diag(evals) Q'``,
    ``WQ = W' Q`` gives a Woodbury solve of the block-A normal equations for
    any ``rho``. ``rho`` is adapted by residual balancing; the scaled duals
    are rescaled with it. Returns ``(iterations, converged, primal, rho)``.
    """
    n, d = W.shape
    m = bp.shape[0]
    q = d - m
    Dinv = np.empty(d)
    scale = np.empty(n)
    Wty = W.T @ y / n
    WQT = np.ascontiguousarray(WQ.T)
    g = np.empty(d)
    h = np.empty(n)
    sol = np.empty(d)
    bp_a = bp.copy()
    bm_a = bm.copy()
    Phi = np.zeros((m, m))
    c = np.empty(m)
    t = np.empty(m)
    ac = np.empty(m)
    bps = np.empty(m + 2)
    it = 0
    adaptations = 0
    stale = True
    primal = np.inf
    while it < max_iter:
        it += 1
        if stale:
            for k in range(m):
                Dinv[k] = 2.0 / rho
            for k in range(m, d):
                Dinv[k] = 1.0 / (2.0 * rho)
            for k in range(n):
                scale[k] = 1.0 / (n + evals[k] / rho)
            stale = False
        # block A: (W'W/n + D)^-1 rhs = D^-1 rhs - D^-1 W' (n I + W D^-1 W')^-1 W D^-1 rhs
        for k in range(m):
            g[k] = Dinv[k] * (Wty[k] + (rho / 2.0) * ((bp[k] - up[k]) - (bm[k] - um[k])))
        for k in range(q):
            i = pairs_i[k]
            j = pairs_j[k]
            cij = 0.5 * ((T[i, j] - U[i, j]) + (T[j, i] - U[j, i]))
            g[m + k] = Dinv[m + k] * (Wty[m + k] + 2.0 * rho * cij)
        np.dot(WQT, g, h)
        h *= scale
        np.dot(WQ, h, sol)
        for k in range(d):
            sol[k] = g[k] - Dinv[k] * sol[k]
        for k in range(m):
            s = (bp[k] - up[k]) + (bm[k] - um[k])
            bp_a[k] = 0.5 * (s + sol[k])
            bm_a[k] = 0.5 * (s - sol[k])
        for k in range(q):
            Phi[pairs_i[k], pairs_j[k]] = sol[m + k]
            Phi[pairs_j[k], pairs_i[k]] = sol[m + k]

        # over-relaxed block-A iterates
        for k in range(m):
            bp_a[k] = RELAX * bp_a[k] + (1.0 - RELAX) * bp[k]
            bm_a[k] = RELAX * bm_a[k] + (1.0 - RELAX) * bm[k]
        for i in range(m):
            for k in range(m):
                if i != k:
                    Phi[i, k] = RELAX * Phi[i, k] + (1.0 - RELAX) * T[i, k]

        # block B
        max_change = 0.0
        for j in range(m):
            for k in range(m):
                c[k] = Phi[j, k] + U[j, k]
            new_p, new_m = _row_budget_prox(
                bp_a[j] + up[j], bm_a[j] + um[j], c, j, l_main, l_int, rho, ac, bps, t
            )
            d1 = max(abs(new_p - bp[j]), abs(new_m - bm[j]))
            if d1 > max_change:
                max_change = d1
            for k in range(m):
                dk = abs(t[k] - T[j, k])
                if dk > max_change:
                    max_change = dk
                T[j, k] = t[k]
            bp[j] = new_p
            bm[j] = new_m

        # dual update
        primal = 0.0
        for k in range(m):
            up[k] += bp_a[k] - bp[k]
            um[k] += bm_a[k] - bm[k]
            primal = max(primal, abs(bp_a[k] - bp[k]), abs(bm_a[k] - bm[k]))
        for i in range(m):
            for k in range(m):
                if i != k:
                    diff = Phi[i, k] - T[i, k]
                    U[i, k] += diff
                    if abs(diff) > primal:
                        primal = abs(diff)
        dual = rho * max_change
        if primal < tol and dual < tol:
            return it, True, primal, rho
        # residual balancing; bounded so the penalty eventually stays fixed
        if it % 10 == 0 and adaptations < 100:
            factor = 1.0
            if primal > 10.0 * dual:
                factor = 2.0
            elif dual > 10.0 * primal:
                factor = 0.5
            if factor != 1.0:
                rho *= factor
                up /= factor
                um /= factor
                U /= factor
                adaptations += 1
                stale = True
    return it, False, primal, rho
