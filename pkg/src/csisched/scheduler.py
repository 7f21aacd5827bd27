"""Realizable pilot schedules from fractional updating frequencies.

The optimizer hands back per-user frequencies p_k with sum p_k = T.  Two
things turn that into an operational policy:

* the quasi-periodic interval law: a user with frequency p should space its
  updates ⌊1/p⌋ or ⌊1/p⌋+1 blocks apart so the mean interval is exactly 1/p;
* a deterministic credit scheduler that picks exactly T users per block and
  drives every user's empirical frequency to p_k, realizing that law.

The module also replays a schedule against the rate tables to obtain the
exactly achieved discounted sum rate, which measures the gap between the
relaxed optimum and a feasible per-block policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ratemodel import RateTableBank, SystemConfig


@dataclass(frozen=True)
class IntervalDistribution:
    """Two-point distribution of a user's updating interval.

    Mass ``weight_low`` sits on ``n_low`` = ⌊1/p⌋ blocks and the rest on
    ``n_low + 1``; the mean interval is exactly 1/p.
    """

    n_low: int
    weight_low: float

    @property
    def weight_high(self) -> float:
        return 1.0 - self.weight_low

    def mean_interval(self) -> float:
        return self.n_low + self.weight_high

    def as_dict(self) -> dict[int, float]:
        if self.weight_high == 0.0:
            return {self.n_low: 1.0}
        return {self.n_low: self.weight_low, self.n_low + 1: self.weight_high}


def interval_distribution(p: float) -> IntervalDistribution:
    """Optimal quasi-periodic interval law for updating frequency p."""
    if not 0.0 < p <= 1.0:
        raise ValueError("updating frequency must lie in (0, 1]")
    inv = 1.0 / p
    n_low = int(np.floor(inv))
    weight_low = 1.0 - inv + n_low
    return IntervalDistribution(n_low=n_low, weight_low=weight_low)


@dataclass
class Schedule:
    """Per-block pilot assignments: exactly T users estimated per block."""

    horizon: int
    T: int
    num_users: int
    assignments: np.ndarray  # (horizon, T) user indices, each row sorted

    def __post_init__(self):
        self.assignments = np.asarray(self.assignments, dtype=np.intp).reshape(
            self.horizon, self.T
        )


def build_schedule(p, T: int, horizon: int, seed=None) -> Schedule:
    """Deterministic credit scheduler realizing frequencies p under a hard
    budget of T pilots per block.

    Every user accrues p_k credit per block; the T largest credits (ties to
    the lower index) are selected and pay 1.  Credits start at p_k times a
    seeded phase in [0, 1) (seed=None gives all-zero phases), which only
    decorrelates the users' alignment, not their long-run frequencies.
    """
    p = np.asarray(p, dtype=float)
    K = p.size
    T = int(T)
    if T > K:
        raise ValueError("cannot estimate more users per block than exist")
    if T < 0:
        raise ValueError("pilot length must be nonnegative")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if abs(p.sum() - T) > 0.5:
        raise ValueError("sum of frequencies must be within 0.5 of T")
    if seed is None:
        credit = np.zeros(K)
    else:
        credit = p * np.random.default_rng(seed).random(K)
    assignments = np.empty((horizon, T), dtype=np.intp)
    for i in range(horizon):
        credit += p
        chosen = np.argsort(-credit, kind="stable")[:T]
        credit[chosen] -= 1.0
        assignments[i] = np.sort(chosen)
    return Schedule(horizon=horizon, T=T, num_users=K, assignments=assignments)


def schedule_stats(schedule: Schedule):
    """Empirical per-user frequencies and updating-interval histograms.

    Returns (frequencies, histograms) where histograms[k] maps interval
    length to its fraction among user k's observed intervals (empty dict if
    the user was estimated fewer than twice).
    """
    K = schedule.num_users
    freq = np.zeros(K)
    hists: list[dict[int, float]] = []
    flat = schedule.assignments.ravel()
    blocks = np.repeat(np.arange(schedule.horizon), schedule.T)
    counts = np.bincount(flat, minlength=K)
    freq = counts / schedule.horizon
    for k in range(K):
        occ = blocks[flat == k]
        gaps = np.diff(occ)
        if gaps.size == 0:
            hists.append({})
            continue
        values, gap_counts = np.unique(gaps, return_counts=True)
        hists.append({int(v): c / gaps.size for v, c in zip(values, gap_counts)})
    return freq, hists


@dataclass
class ScheduleStats:
    """Outcome of replaying a schedule against the rate model.

    ``per_user_rate`` is the undiscounted average rate per user;
    ``discounted_sum_rate`` applies the (1 - T/C) estimation-overhead factor
    to the sum, matching the optimizer's objective.
    """

    frequencies: np.ndarray
    interval_histograms: list[dict[int, float]]
    per_user_rate: np.ndarray
    discounted_sum_rate: float


def exact_average_rate(schedule: Schedule, cfg: SystemConfig, users, tables) -> ScheduleStats:
    """Walk a schedule block by block and average the exact aged-CSI rates.

    A user estimated in block i transmits at age 0 during that same block;
    the age then grows by one per block until the next estimation.  Users
    never estimated so far contribute zero rate (no CSI, no beamforming).
    """
    K = schedule.num_users
    if len(users) != K or len(tables) != K:
        raise ValueError("schedule and user set sizes do not match")
    bank = RateTableBank(tables)
    age = np.zeros(K, dtype=np.intp)
    seen = np.zeros(K, dtype=bool)
    totals = np.zeros(K)
    for i in range(schedule.horizon):
        sel = schedule.assignments[i]
        age[sel] = 0
        seen[sel] = True
        totals += np.where(seen, bank.rate_at_age(age), 0.0)
        age += 1
    per_user = totals / schedule.horizon
    discount = 1.0 - schedule.T / cfg.C
    freq, hists = schedule_stats(schedule)
    return ScheduleStats(
        frequencies=freq,
        interval_histograms=hists,
        per_user_rate=per_user,
        discounted_sum_rate=discount * float(per_user.sum()),
    )


def write_schedule(schedule: Schedule, path) -> None:
    """Serialize as one line per block: block index, then the user indices."""
    with open(path, "w", encoding="ascii") as fh:
        for i in range(schedule.horizon):
            row = " ".join(str(int(u)) for u in schedule.assignments[i])
            fh.write(f"{i} {row}".rstrip() + "\n")


def read_schedule(path, num_users: int | None = None) -> Schedule:
    """Parse the line-per-block format written by write_schedule."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            rows.append([int(tok) for tok in parts[1:]])
    if not rows:
        raise ValueError("empty schedule file")
    T = len(rows[0])
    if any(len(r) != T for r in rows):
        raise ValueError("inconsistent pilots per block")
    assignments = np.array(rows, dtype=np.intp).reshape(len(rows), T)
    if num_users is None:
        num_users = int(assignments.max()) + 1 if assignments.size else 0
    return Schedule(horizon=len(rows), T=T, num_users=num_users, assignments=assignments)
