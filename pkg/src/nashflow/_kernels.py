"""Compiled kernels for the neurodynamic flow.

These mirror ``game.objective_gradient`` and the penalty functions in
``constraints`` but work on flat index tables so a whole integration chunk
runs without returning to the interpreter. The numpy versions stay the
reference; tests compare the two.
"""

import numpy as np
from numba import njit

# run status codes
RUNNING = 0
CONVERGED = 1
EXHAUSTED = 2
FAULT = 3

MAX_STEP_NORM = 0.1


def index_tables(game):
    """Flat lookup tables consumed by the kernels."""
    counts = np.asarray(game.strategy_counts, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    grid = np.indices(tuple(counts)).reshape(len(counts), -1).T
    prof_idx = (grid + offsets[:-1]).astype(np.int64)
    block_of = np.repeat(np.arange(len(counts)), counts).astype(np.int64)
    return np.ascontiguousarray(game.payoffs), np.ascontiguousarray(prof_idx), block_of, offsets


@njit(cache=True)
def _regrets_into(payoffs, prof_idx, block_of, x, U, u, z):
    n_players, n_profiles = payoffs.shape
    m = x.shape[0]
    U[:] = 0.0
    u[:] = 0.0
    for s in range(n_profiles):
        for i in range(n_players):
            prod = payoffs[i, s]
            for r in range(n_players):
                if r != i:
                    prod *= x[prof_idx[s, r]]
            U[prof_idx[s, i]] += prod
    for k in range(m):
        u[block_of[k]] += x[k] * U[k]
    for k in range(m):
        z[k] = U[k] - u[block_of[k]]


@njit(cache=True)
def regret_terms(payoffs, prof_idx, block_of, offsets, x):
    """Return ``U`` (pure-strategy payoffs against the rest) and regrets ``z``."""
    m = x.shape[0]
    U = np.empty(m)
    z = np.empty(m)
    _regrets_into(payoffs, prof_idx, block_of, x, U, np.empty(payoffs.shape[0]), z)
    return U, z


@njit(cache=True)
def _gradient_into(payoffs, prof_idx, block_of, x, U, u, z, S, w, grad):
    """Fill ``grad`` with the objective gradient and return the objective."""
    n_players, n_profiles = payoffs.shape
    m = x.shape[0]
    _regrets_into(payoffs, prof_idx, block_of, x, U, u, z)
    Q = 0.0
    S[:] = 0.0
    for k in range(m):
        if z[k] > 0.0:
            Q += z[k] * z[k]
            S[block_of[k]] += 2.0 * z[k]
    grad[:] = 0.0
    if Q == 0.0:
        return Q
    for k in range(m):
        qk = z[k] if z[k] > 0.0 else 0.0
        w[k] = 2.0 * qk - x[k] * S[block_of[k]]
        grad[k] = -S[block_of[k]] * U[k]
    for s in range(n_profiles):
        for i in range(n_players):
            if S[i] == 0.0:
                continue
            a = payoffs[i, s] * w[prof_idx[s, i]]
            if a == 0.0:
                continue
            for r in range(n_players):
                if r == i:
                    continue
                prod = a
                for t in range(n_players):
                    if t != i and t != r:
                        prod *= x[prof_idx[s, t]]
                grad[prof_idx[s, r]] += prod
    return Q


@njit(cache=True)
def objective_and_gradient(payoffs, prof_idx, block_of, offsets, x):
    m = x.shape[0]
    n = payoffs.shape[0]
    grad = np.empty(m)
    Q = _gradient_into(payoffs, prof_idx, block_of, x, np.empty(m), np.empty(n),
                       np.empty(m), np.empty(n), np.empty(m), grad)
    return Q, grad


@njit(cache=True)
def objective_value(payoffs, prof_idx, block_of, offsets, x):
    U, z = regret_terms(payoffs, prof_idx, block_of, offsets, x)
    Q = 0.0
    for k in range(z.shape[0]):
        if z[k] > 0.0:
            Q += z[k] * z[k]
    return Q


@njit(cache=True)
def _penalties_into(x, offsets, h):
    n_players = offsets.shape[0] - 1
    G = 0.0
    H2 = 0.0
    for i in range(n_players):
        acc = -1.0
        for k in range(offsets[i], offsets[i + 1]):
            v = x[k]
            acc += v
            if v < 0.0:
                G -= v
            elif v > 1.0:
                G += v - 1.0
        h[i] = acc
        H2 += acc * acc
    return G, np.sqrt(H2)


@njit(cache=True)
def penalties(x, offsets):
    """Box violation ``G``, sum residuals ``h`` and their norm ``H``."""
    h = np.empty(offsets.shape[0] - 1)
    G, H = _penalties_into(x, offsets, h)
    return G, h, H


@njit(cache=True)
def project_blocks(y, offsets, out):
    """Project each block of ``y`` onto its simplex; exact 1.0 for single-support blocks."""
    n_players = offsets.shape[0] - 1
    for i in range(n_players):
        a = offsets[i]
        b = offsets[i + 1]
        u = np.sort(y[a:b])
        css = 0.0
        tau = 0.0
        for k in range(b - a):
            css += u[b - a - 1 - k]
            t = (css - 1.0) / (k + 1)
            if u[b - a - 1 - k] - t > 0.0:
                tau = t
        support = 0
        last = a
        for k in range(a, b):
            v = y[k] - tau
            if v > 0.0:
                out[k] = v
                support += 1
                last = k
            else:
                out[k] = 0.0
        if support == 1:
            out[last] = 1.0


@njit(cache=True)
def _multipliers_into(normal, p, offsets, zeta, c):
    n_players = offsets.shape[0] - 1
    c[:] = 0.0
    scale = 1.0
    for k in range(normal.shape[0]):
        if abs(normal[k]) > scale:
            scale = abs(normal[k])
    tol = 1e-9 * scale
    norm2 = 0.0
    for i in range(n_players):
        lo = -np.inf
        hi = np.inf
        for k in range(offsets[i], offsets[i + 1]):
            if p[k] == 0.0:
                a = normal[k]
                b = normal[k] + zeta
            elif p[k] == 1.0:
                a = normal[k] - zeta
                b = normal[k]
            else:
                a = normal[k] - tol
                b = normal[k] + tol
            if a > lo:
                lo = a
            if b < hi:
                hi = b
        if lo > hi + tol:
            return False
        if lo > 0.0:
            c[i] = lo
        elif hi < 0.0:
            c[i] = hi
        norm2 += c[i] * c[i]
    return np.sqrt(norm2) <= zeta * zeta * (1.0 + 1e-12) + tol


@njit(cache=True)
def penalty_multipliers(normal, p, offsets, zeta):
    """Decompose ``normal`` as ``zeta*kappa + zeta**2 * C^T mu`` at the feasible point ``p``.

    Returns ``(ok, c)`` with ``c = zeta**2 * mu``; ``ok`` is False when no
    ``kappa`` in the box subdifferential and ``mu`` in the unit ball fit.
    """
    c = np.zeros(offsets.shape[0] - 1)
    ok = _multipliers_into(normal, p, offsets, zeta, c)
    return ok, c


def workspace(m, n_players):
    """Scratch arrays for ``_advance_into``: ``(U, z, w, grad, y, p, normal, kappa, eta)`` and ``(u, S, h, c)``."""
    return np.zeros((9, m)), np.zeros((4, n_players))


@njit(cache=True)
def _advance_into(payoffs, prof_idx, block_of, offsets, x, zeta, step_size, nu,
                  feas_tol, work, pwork, out):
    """One time step of the flow written into ``out``.

    Tries the proximal (implicit) treatment of the penalty first: when the
    projection of the descent point satisfies the penalty's optimality
    condition it is exactly the proximal point. Otherwise takes an explicit
    Euler step with the entrywise subgradient selections.

    Returns ``(zeta_new, implicit)``; the selections used are left in
    ``work[7]`` (kappa) and ``work[8]`` (eta).
    """
    m = x.shape[0]
    U, z, w, grad, y, p, normal, kappa, eta = (
        work[0], work[1], work[2], work[3], work[4], work[5], work[6], work[7], work[8]
    )
    u, S, h, c = pwork[0], pwork[1], pwork[2], pwork[3]
    G, H = _penalties_into(x, offsets, h)
    g = 0.0 if G > 1.0 else 1.0 - nu
    if g > 0.0:
        _gradient_into(payoffs, prof_idx, block_of, x, U, u, z, S, w, grad)
    else:
        grad[:] = 0.0
    for k in range(m):
        y[k] = x[k] - step_size * g * grad[k]
    project_blocks(y, offsets, p)
    for k in range(m):
        normal[k] = (y[k] - p[k]) / step_size
    rate = 1.0 if G + H > feas_tol else 0.0
    if _multipliers_into(normal, p, offsets, zeta, c):
        for k in range(m):
            ci = c[block_of[k]]
            if zeta > 0.0:
                kappa[k] = (normal[k] - ci) / zeta
                eta[k] = ci / (zeta * zeta)
            else:
                kappa[k] = 0.0
                eta[k] = 0.0
            out[k] = p[k]
        return zeta + step_size * rate, True
    vn2 = 0.0
    for k in range(m):
        kappa[k] = -1.0 if x[k] < 0.0 else (1.0 if x[k] > 1.0 else 0.0)
        eta[k] = h[block_of[k]] / H if H > 0.0 else 0.0
        v = -g * grad[k] - zeta * (kappa[k] + zeta * eta[k])
        out[k] = v
        vn2 += v * v
    scale = 1.0
    vn = np.sqrt(vn2)
    if vn * step_size > MAX_STEP_NORM:
        scale = MAX_STEP_NORM / (vn * step_size)
    for k in range(m):
        out[k] = x[k] + step_size * scale * out[k]
    return zeta + step_size * rate, False


@njit(cache=True)
def advance(payoffs, prof_idx, block_of, offsets, x, zeta, step_size, nu, feas_tol):
    """Single step; returns ``(x_new, zeta_new, kappa, eta, implicit)``."""
    m = x.shape[0]
    n = offsets.shape[0] - 1
    work = np.zeros((9, m))
    pwork = np.zeros((4, n))
    out = np.empty(m)
    zeta_new, implicit = _advance_into(payoffs, prof_idx, block_of, offsets, x, zeta,
                                       step_size, nu, feas_tol, work, pwork, out)
    return out, zeta_new, work[7].copy(), work[8].copy(), implicit


@njit(cache=True)
def _record(buf, row, t, x, Q, G, H, zeta, dxn):
    m = x.shape[0]
    buf[row, 0] = t
    for k in range(m):
        buf[row, 1 + k] = x[k]
    buf[row, m + 1] = Q
    buf[row, m + 2] = G
    buf[row, m + 3] = H
    buf[row, m + 4] = zeta
    buf[row, m + 5] = dxn


@njit(cache=True)
def run_chunk(payoffs, prof_idx, block_of, offsets, x, zeta, step, n_steps,
              max_steps, step_size, nu, feas_tol, stat_tol, window, consec,
              entry_step, stride, buf):
    """Integrate up to ``n_steps`` steps starting at global step ``step``.

    Samples every ``stride`` steps (and the final one) go into ``buf``.
    Returns the updated state, status code and number of rows written.
    """
    m = x.shape[0]
    n_players = offsets.shape[0] - 1
    x = x.copy()
    x_new = np.empty(m)
    work = np.zeros((9, m))
    pwork = np.zeros((4, n_players))
    h = np.empty(n_players)
    rows = 0
    status = RUNNING
    for _ in range(n_steps):
        if step >= max_steps:
            status = EXHAUSTED
            break
        zeta_new, implicit = _advance_into(payoffs, prof_idx, block_of, offsets, x, zeta,
                                           step_size, nu, feas_tol, work, pwork, x_new)
        finite = True
        d2 = 0.0
        for k in range(m):
            if not np.isfinite(x_new[k]):
                finite = False
            d2 += (x_new[k] - x[k]) ** 2
        if not finite:
            status = FAULT
            break
        dxn = np.sqrt(d2) / step_size
        x[:] = x_new
        zeta = zeta_new
        step += 1
        G, H = _penalties_into(x, offsets, h)
        feasible = G + H <= feas_tol
        if feasible and entry_step < 0:
            entry_step = step
        if dxn <= stat_tol and feasible:
            consec += 1
        else:
            consec = 0
        if consec >= window:
            status = CONVERGED
        if step % stride == 0 or status != RUNNING or step >= max_steps:
            Q = objective_value(payoffs, prof_idx, block_of, offsets, x)
            _record(buf, rows, step * step_size, x, Q, G, H, zeta, dxn)
            rows += 1
        if status != RUNNING:
            break
    if status == RUNNING and step >= max_steps:
        status = EXHAUSTED
    return x, zeta, step, consec, entry_step, status, rows, work[7].copy(), work[8].copy()
