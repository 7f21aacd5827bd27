"""Independent reference implementations used by several test modules.

These deliberately avoid the library's own algorithms: the projection oracle
enumerates pin patterns, the interval oracle scans explicit distributions,
and the grid oracle exhausts the feasible simplex.
"""

import itertools

import numpy as np

from csisched.ratemodel import g_extended, s_of_p


def projection_oracle(x, T):
    """Brute-force capped-simplex projection: enumerate every {0, interior,
    1} pin pattern, solve each equality-constrained subproblem, keep the
    feasible minimum-distance candidate."""
    x = np.asarray(x, dtype=float)
    K = x.size
    pats = np.array(list(itertools.product((0, 1, 2), repeat=K)))
    is_one = pats == 1
    is_int = pats == 2
    n_int = is_int.sum(axis=1)
    budget = T - is_one.sum(axis=1)
    nu = (budget - is_int @ x) / np.maximum(n_int, 1)
    cand = is_one + is_int * (x[None, :] + nu[:, None])
    feasible = np.where(
        n_int > 0,
        (cand > -1e-11).all(axis=1) & (cand < 1 + 1e-11).all(axis=1),
        np.abs(budget) < 1e-11,
    )
    d2 = ((cand - x[None, :]) ** 2).sum(axis=1)
    d2[~feasible] = np.inf
    return np.clip(cand[np.argmin(d2)], 0.0, 1.0)


def brute_force_interval_value(table, p, support_max=6, grid=1e-3):
    """Best mean-constrained updating-interval distribution on supports of up
    to three lengths in {1..support_max}: pairs solved exactly, triples
    scanned on a weight grid.  Linear objectives peak on two-point supports,
    so this dominates every distribution on the full support."""
    target = 1.0 / p
    ns = np.arange(1, support_max + 1)
    gvals = np.array([g_extended(table, float(n)) for n in ns])
    best = -np.inf
    for a in range(len(ns)):
        for b in range(a, len(ns)):
            na, nb = ns[a], ns[b]
            if na == nb:
                if abs(na - target) < 1e-12:
                    best = max(best, p * gvals[a])
                continue
            w = (nb - target) / (nb - na)
            if -1e-12 <= w <= 1 + 1e-12:
                w = min(max(w, 0.0), 1.0)
                best = max(best, p * (w * gvals[a] + (1 - w) * gvals[b]))
    weights = np.arange(0.0, 1.0 + grid, grid)
    for a in range(len(ns)):
        for b in range(a + 1, len(ns)):
            for c in range(b + 1, len(ns)):
                na, nb, nc = ns[a], ns[b], ns[c]
                wa = weights
                rem = 1.0 - wa
                need = target - wa * na
                wb = (nc * rem - need) / (nc - nb)
                wc = rem - wb
                ok = (wb >= -1e-12) & (wc >= -1e-12)
                if not ok.any():
                    continue
                vals = p * (wa * gvals[a] + wb * gvals[b] + wc * gvals[c])
                best = max(best, float(vals[ok].max()))
    return best


def grid_best_objective(tables, T, C, step=1e-3):
    """Exhaustive grid search of the unsmoothed discounted objective over the
    capped simplex (K <= 3)."""
    g = np.arange(0.0, 1.0 + step / 2, step)
    if len(tables) == 1:
        return (1 - T / C) * float(s_of_p(tables[0], min(max(T, 0.0), 1.0)))
    if len(tables) == 2:
        p2 = T - g
        ok = (p2 >= -1e-12) & (p2 <= 1 + 1e-12)
        vals = s_of_p(tables[0], g[ok]) + s_of_p(tables[1], np.clip(p2[ok], 0, 1))
        return (1 - T / C) * float(vals.max())
    p1, p2 = np.meshgrid(g, g, indexing="ij")
    p3 = T - p1 - p2
    ok = (p3 >= -1e-12) & (p3 <= 1 + 1e-12)
    s1 = s_of_p(tables[0], g)
    s2 = s_of_p(tables[1], g)
    vals = np.where(ok, s1[:, None] + s2[None, :], -np.inf)
    vals[ok] += s_of_p(tables[2], np.clip(p3[ok], 0, 1))
    return (1 - T / C) * float(vals.max())
