"""Pilot-budget allocation by gradient projection.

Maximizes the discounted sum rate (1 - T/C) * sum_k S_k(p_k) over the capped
simplex {p : sum p_k = T, 0 <= p_k <= 1}.  Gradients come from the smoothed
per-user rate curves; each step moves along the normalized gradient and is
projected back onto the feasible set.  An outer one-dimensional search picks
the pilot length T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ratemodel import DEFAULT_DELTA, RateTableBank, SystemConfig

# Gradient of the smoothed rate is one-sided at p = 0; evaluate it just
# inside the domain and let the projection handle the boundary.
P_MIN_GRADIENT = 1e-6


@dataclass(frozen=True)
class OptimizerSettings:
    """Gradient-projection knobs.  Deterministic: no randomness anywhere."""

    delta: float = DEFAULT_DELTA
    step_a: float = 0.1
    max_iter: int = 50_000
    tol: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if self.step_a <= 0:
            raise ValueError("step_a must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class FrequencyAllocation:
    """Optimizer output: per-user updating frequencies under pilot length T.

    ``objective`` is the unsmoothed discounted sum rate actually achieved by
    ``p`` (the smoothed surrogate is used only while iterating).
    """

    p: np.ndarray
    T: int
    objective: float
    iterations: int
    converged: bool


def project_capped_simplex(x, T: float) -> np.ndarray:
    """Euclidean projection of x onto {p : sum p = T, 0 <= p_k <= 1}.

    Sorts x ascending and maintains a window [i, j] of candidate interior
    coordinates; everything below i is pinned to 0 and everything above j to
    1.  The common shift nu = (T - #ones - sum of window) / window size is
    the equality-constrained projection of the window; if it violates a box
    bound the offending end is pinned and the window shrinks.

    When both ends violate at once, the end to pin is decided by the sign of
    sum_k clip(x_k + nu, 0, 1) - T: a nonnegative residual certifies that the
    true shift is <= nu, so the bottom coordinate is clipped to 0 in the true
    projection (and symmetrically for the top).  Pinning the violating end is
    always consistent with the true active set, so at most K - 1 shrink steps
    reach the exact projection.
    """
    x = np.asarray(x, dtype=float)
    K = x.size
    if not 0.0 <= T <= K:
        raise ValueError(f"pilot budget T={T} outside [0, {K}]")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    csum = np.concatenate([[0.0], np.cumsum(xs)])
    ps = np.empty(K)
    i, j = 0, K - 1
    ones = 0
    while i <= j:
        n = j - i + 1
        nu = (T - ones - (csum[j + 1] - csum[i])) / n
        lo_bad = xs[i] + nu < 0.0
        hi_bad = xs[j] + nu > 1.0
        if not lo_bad and not hi_bad:
            ps[i : j + 1] = xs[i : j + 1] + nu
            break
        if lo_bad and hi_bad:
            pin_low = np.clip(x + nu, 0.0, 1.0).sum() - T >= 0.0
        else:
            pin_low = lo_bad
        if pin_low:
            ps[i] = 0.0
            i += 1
        else:
            ps[j] = 1.0
            ones += 1
            j -= 1
    p = np.empty(K)
    p[order] = ps
    _fold_residual(p, T)
    return p


def _fold_residual(p: np.ndarray, T: float) -> None:
    """Fold the last few ulps of the sum constraint into the largest interior
    coordinate, keeping it inside the box."""
    residual = T - p.sum()
    if residual != 0.0:
        interior = (p > 0.0) & (p < 1.0)
        if interior.any():
            k = np.argmax(np.where(interior, p, -np.inf))
            p[k] = min(max(p[k] + residual, 0.0), 1.0)


def optimize_frequencies(
    cfg: SystemConfig,
    users,
    tables,
    T: int,
    settings: OptimizerSettings | None = None,
    callback=None,
) -> FrequencyAllocation:
    """Optimal updating frequencies for a fixed pilot length T.

    Starts from the uniform point p_k = T/K and ascends the smoothed
    objective along the normalized gradient with projection after every
    step.  A step is accepted only if the smoothed objective does not
    decrease; otherwise the step size is halved, which keeps the ascent
    monotone on this concave problem.  A final exact refinement removes the
    smoothing bias from the returned allocation.
    ``callback(iteration, p, smoothed_objective)`` fires after every
    accepted step.
    """
    if settings is None:
        settings = OptimizerSettings()
    K = len(tables)
    if len(users) != K:
        raise ValueError("users and tables must have matching length")
    T = int(T)
    if not 0 <= T <= K:
        raise ValueError(f"pilot length T={T} outside [0, {K}]")
    discount = 1.0 - T / cfg.C
    bank = RateTableBank(tables)

    if T == 0:
        # No estimation, no coherent precoding: the zero allocation is forced.
        return FrequencyAllocation(np.zeros(K), 0, 0.0, 0, True)
    if T == K:
        if K > cfg.C:
            raise ValueError("T = K with K > C leaves no room for data")
        p = np.ones(K)
        objective = discount * float(bank.s(p).sum())
        return FrequencyAllocation(p, T, objective, 0, True)

    delta = settings.delta
    p = np.full(K, T / K)
    obj = discount * float(bank.s_hat(p, delta).sum())
    iterations = 0
    converged = False
    last_step = settings.step_a
    while iterations < settings.max_iter:
        iterations += 1
        grad = bank.s_hat_prime(np.clip(p, P_MIN_GRADIENT, 1.0), delta)
        # The projection annihilates the mean component of the step, so
        # normalize the centered gradient: same direction after projecting,
        # but the step length stays commensurate with actual movement
        # instead of collapsing once the marginals equalize.
        grad = grad - grad.mean()
        gnorm = float(np.sqrt(grad @ grad))
        if gnorm < 1e-302:
            converged = True
            break
        direction = grad / gnorm
        # Backtracking warm-started from the last accepted step: near the
        # optimum each iteration costs a couple of objective evaluations
        # instead of a full halving run from step_a.
        step = min(8.0 * last_step, settings.step_a)
        cand = None
        cand_obj = -np.inf
        while step > 1e-15:
            trial = project_capped_simplex(p + step * direction, float(T))
            trial_obj = discount * float(bank.s_hat(trial, delta).sum())
            if trial_obj >= obj:
                cand, cand_obj = trial, trial_obj
                break
            step *= 0.5
        if cand is None:
            converged = True
            break
        gain = cand_obj - obj
        p, obj = cand, cand_obj
        last_step = step
        if callback is not None:
            callback(iterations, p, obj)
        if gain < settings.tol:
            converged = True
            break
    p = _refine_exact(bank, p, T)
    objective = discount * float(bank.s(p).sum())
    return FrequencyAllocation(p, T, objective, iterations, converged)


def _refine_exact(bank: RateTableBank, p: np.ndarray, T: int) -> np.ndarray:
    """Exact maximizer of the unsmoothed objective, replacing the iterate if
    it is at least as good.

    The unsmoothed per-user rate is concave and piecewise linear in p with
    breakpoints at p = 1/m, so the problem is a separable concave allocation
    and the greedy marginal allocation is exact: fill segments in order of
    decreasing slope, splitting the marginal equal-slope group in proportion
    to segment width (which keeps identical users symmetric).  This removes
    the O(delta) smoothing bias that gradient iterations cannot see.
    """
    K, L = bank.K, bank.L
    m = np.arange(1, L + 1)
    # Slope of S_k on p in [1/(m+1), 1/m] is G_k(m) - m R_k(m); the padded
    # tail rows reproduce the constant tail slope automatically.  The last
    # segment covers (0, 1/L].
    slopes = (bank.prefix[:, 1 : L + 1] - m * bank.rates[:, 1 : L + 1]).ravel()
    widths = 1.0 / m - 1.0 / (m + 1)
    widths[-1] = 1.0 / L
    widths = np.broadcast_to(widths, (K, L)).ravel()

    order = np.argsort(-slopes, kind="stable")
    cum = np.cumsum(widths[order])
    cut = int(np.searchsorted(cum, T - 1e-12))
    fill = np.zeros(K * L)
    if cut >= slopes.size:
        fill[:] = widths
    else:
        tie = slopes[order[cut]]
        group = slopes[order] == tie
        g0 = int(np.argmax(group))
        fill[order[:g0]] = widths[order[:g0]]
        budget = T - (cum[g0 - 1] if g0 > 0 else 0.0)
        members = order[g0 : int(np.argmax(~group[g0:])) + g0] if (~group[g0:]).any() else order[g0:]
        gw = widths[members].sum()
        if gw > 0:
            fill[members] = widths[members] * (budget / gw)
    q = np.minimum(fill.reshape(K, L).sum(axis=1), 1.0)
    _fold_residual(q, T)
    if float(bank.s(q).sum()) >= float(bank.s(p).sum()):
        return q
    return p


def optimize_pilot_length(
    cfg: SystemConfig,
    users,
    tables,
    settings: OptimizerSettings | None = None,
):
    """Search the pilot length: solve the frequency problem for every
    integer T in [0, min(K, C)] and keep the best unsmoothed objective.

    Returns (best_T, best allocation, full per-T curve).  Ties go to the
    smaller T.
    """
    t_hi = min(len(tables), cfg.C)
    curve = [
        optimize_frequencies(cfg, users, tables, T, settings)
        for T in range(t_hi + 1)
    ]
    best_T = 0
    for T, alloc in enumerate(curve):
        if alloc.objective > curve[best_T].objective:
            best_T = T
    return best_T, curve[best_T], curve
