"""Query-level statistical emulators of quantum search subroutines.

These emulate only what the cost claims concern: charged oracle-query counts
and success probabilities.  Each Grover round with j iterations succeeds with
the exact amplitude probability sin^2((2j+1) * arcsin(sqrt(t/N))) and charges
j+1 queries (j iterations plus one verification).  The emulator is allowed to
read the instance classically (to count marked items, to canonicalise ties);
such reads are tallied separately and never charged as quantum cost.

Charging conventions, fixed here:
  * a search run stops ("exhausts") once its charged queries exceed
    ``c_budget * sqrt(N)``;
  * minimum finding repeats its threshold descent ``ceil(log2(1/eps)) + 1``
    times and combines repetitions by taking the minimum;
  * first-marked-element search makes ``linlin_passes`` doubling-prefix
    passes, min-combined, each pass using a reduced prefix budget and a
    reduced-budget inner minimum-finding stage (its amplification factor is
    therefore ``linlin_passes * inner repetitions``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np


@dataclass
class EmulatorConfig:
    seed: int = 0
    growth: float = 1.2  # schedule growth factor, > 1
    c_budget: float = 9.0  # run budget multiplier on sqrt(N)
    linlin_passes: int = 3  # amplification of first-hit search
    linlin_prefix_budget: float = 0.3  # soft budget multiplier per prefix
    linlin_inner_budget: float = 1.0  # c_budget of the inner min-finding
    linlin_inner_eps: float = 0.25  # eps of the inner min-finding
    linlin_verify: float = 1.8  # budget multiplier of the verification search

    def __post_init__(self):
        if self.growth <= 1:
            raise ValueError("growth must exceed 1")
        if self.c_budget <= 0:
            raise ValueError("c_budget must be positive")

    def linlin_amplification(self) -> int:
        """Total repetition multiple of one first-hit call (passes x inner reps)."""
        return self.linlin_passes * _dh_reps(self.linlin_inner_eps)


@dataclass
class QueryTally:
    oracle_queries: int = 0
    classical_side_queries: int = 0

    def add(self, other: "QueryTally") -> None:
        self.oracle_queries += other.oracle_queries
        self.classical_side_queries += other.classical_side_queries


def round_success_probability(t: int, N: int, j: int) -> float:
    """Exact success probability of a Grover round with j iterations, t of N marked."""
    if t == 0:
        return 0.0
    theta = math.asin(math.sqrt(t / N))
    return math.sin((2 * j + 1) * theta) ** 2


def _as_marked(predicate, N: int) -> np.ndarray:
    if callable(predicate):
        return np.fromiter((bool(predicate(i)) for i in range(N)), dtype=bool, count=N)
    arr = np.asarray(predicate, dtype=bool)
    if arr.shape != (N,):
        raise ValueError(f"predicate array must have shape ({N},)")
    return arr


def grover_search_emulated(
    predicate,
    N: int,
    config: EmulatorConfig,
    rng: np.random.Generator,
    budget: Optional[float] = None,
    start_at_cap: bool = False,
) -> tuple[Optional[int], QueryTally]:
    """Exponential-schedule Grover search emulation over {0..N-1}.

    Rounds draw j uniformly below a schedule bound that grows by ``growth``
    (capped at sqrt(N)), charge j+1 queries, and succeed with the exact
    amplitude probability; success returns a uniformly random marked index.
    Declares None once charged queries exceed the budget (default
    ``c_budget * sqrt(N)``), which is the t = 0 behaviour.  Verification-style
    callers that expect few marked items pass ``start_at_cap=True`` to begin
    the schedule at sqrt(N) instead of ramping up.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    marked = _as_marked(predicate, N)
    tally = QueryTally(classical_side_queries=N)
    t = int(marked.sum())
    if budget is None:
        budget = config.c_budget * math.sqrt(N)
    theta = math.asin(math.sqrt(t / N)) if t > 0 else 0.0
    cap = max(1.0, math.sqrt(N))
    m_sched = cap if start_at_cap else 1.0
    while True:
        j = int(rng.integers(0, max(1, math.ceil(m_sched))))
        tally.oracle_queries += j + 1
        if t > 0 and rng.random() < math.sin((2 * j + 1) * theta) ** 2:
            hits = np.flatnonzero(marked)
            return int(hits[rng.integers(0, t)]), tally
        if tally.oracle_queries > budget:
            return None, tally
        m_sched = min(config.growth * m_sched, cap)


def _dh_reps(eps: float) -> int:
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return math.ceil(math.log2(1.0 / eps)) + 1


def durr_hoyer_min_emulated(
    values,
    eps: float,
    config: EmulatorConfig,
    rng: np.random.Generator,
    initial_index: Optional[int] = None,
    chain: bool = False,
) -> tuple[int, QueryTally]:
    """Threshold-descent minimum finding over a sequence of N values.

    Each repetition starts from a random index (the first may be seeded with
    ``initial_index``) and repeatedly Grover-searches {i : v_i < v_y},
    moving the threshold on success, until its ``c_budget * sqrt(N)`` budget
    is spent.  Repetitions (``ceil(log2(1/eps)) + 1`` of them) are combined
    by minimum value.  With ``chain=True`` each repetition resumes from the
    best index found so far instead of a random start (used when a known
    candidate seeds the search, as in the first-hit composition).
    """
    values = np.asarray(values, dtype=float)
    N = len(values)
    if N == 0:
        raise ValueError("empty instance")
    tally = QueryTally()
    if N == 1:
        tally.oracle_queries += 1
        tally.classical_side_queries += 1
        return 0, tally
    reps = _dh_reps(eps)
    best_idx = None
    for r in range(reps):
        budget = config.c_budget * math.sqrt(N)
        spent0 = tally.oracle_queries
        if r == 0 and initial_index is not None:
            y = int(initial_index)
        elif chain and best_idx is not None:
            y = int(best_idx)
        else:
            y = int(rng.integers(0, N))
        while tally.oracle_queries - spent0 <= budget:
            marked = values < values[y]
            found, tg = grover_search_emulated(
                marked, N, config, rng, budget=budget - (tally.oracle_queries - spent0)
            )
            tally.add(tg)
            if found is None:
                break
            y = found
        if best_idx is None or values[y] < values[best_idx]:
            best_idx = y
    return int(best_idx), tally


def lin_lin_first_hit_emulated(
    predicate,
    N: int,
    config: EmulatorConfig,
    rng: np.random.Generator,
    passes: Optional[int] = None,
) -> tuple[Optional[int], QueryTally]:
    """First-marked-element search over {0..N-1} via a doubling-prefix schedule.

    Each pass Grover-searches prefixes of size min(2^i, N) under a soft
    per-prefix budget; on the first success at some prefix, the minimal
    marked index within it is located by reduced-budget minimum finding over
    (index if marked else +inf).  The final full-size prefix consumes the
    remaining ``c_budget * sqrt(N)`` so an all-zero instance charges
    Theta(sqrt(N)) and returns None.  Passes are combined by minimum.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    marked = _as_marked(predicate, N)
    tally = QueryTally(classical_side_queries=N)
    if passes is None:
        passes = config.linlin_passes
    best = None
    for _ in range(passes):
        hit = _first_hit_pass(marked, N, config, rng, tally)
        if hit is not None and (best is None or hit < best):
            best = hit
    return best, tally


def _first_hit_pass(marked, N, config, rng, tally) -> Optional[int]:
    global_budget = config.c_budget * math.sqrt(N)
    spent0 = tally.oracle_queries
    i = 0
    while True:
        Ni = min(2**i, N)
        last = Ni >= N
        if last:
            soft = global_budget - (tally.oracle_queries - spent0)
            if soft <= 0:
                return None
        else:
            soft = config.linlin_prefix_budget * math.sqrt(Ni)
        found, tg = grover_search_emulated(marked[:Ni], Ni, config, rng, budget=soft)
        tally.add(tg)
        if found is not None:
            return _locate_first(marked, found, config, rng, tally)
        if last:
            return None
        i += 1


def _locate_first(marked, idx: int, config, rng, tally) -> int:
    """Minimal marked index within {0..idx}: reduced-budget minimum finding over
    (index if marked else +inf), then a verification search below the candidate;
    a verification hit restarts the location stage from the hit."""
    while True:
        vals = np.where(marked[: idx + 1], np.arange(idx + 1, dtype=float), np.inf)
        inner_cfg = replace(config, c_budget=config.linlin_inner_budget)
        cand, tdh = durr_hoyer_min_emulated(
            vals, config.linlin_inner_eps, inner_cfg, rng, initial_index=idx, chain=True
        )
        tally.add(tdh)
        if cand == 0:
            return 0
        hit, tg = grover_search_emulated(
            marked[:cand],
            cand,
            config,
            rng,
            budget=config.linlin_verify * math.sqrt(cand),
            start_at_cap=True,
        )
        tally.add(tg)
        if hit is None:
            return int(cand)
        idx = hit


def identify_extremes_emulated(
    values,
    k_budget: int,
    config: EmulatorConfig,
    rng: np.random.Generator,
) -> tuple[tuple[int, int, int], QueryTally]:
    """Locate (worst, next_worst, best) of N cached values by three emulated
    minimum-finding runs: worst and next-worst over the negated values (the
    next-worst excluding the found worst), best over the values themselves.

    Each run targets failure probability 1/k_budget.  Returned indices are
    canonicalised to the stable-descending-sort identities for the value the
    emulator found, so ties resolve identically to the classical path.
    """
    values = np.asarray(values, dtype=float)
    N = len(values)
    if N < 2:
        raise ValueError("need at least two values")
    eps = 1.0 / max(2, k_budget)
    tally = QueryTally()

    neg = -values
    w_raw, t1 = durr_hoyer_min_emulated(neg, eps, config, rng)
    tally.add(t1)
    worst = int(np.flatnonzero(values == values[w_raw])[0])
    tally.classical_side_queries += N

    neg_excl = neg.copy()
    neg_excl[worst] = np.inf
    nw_raw, t2 = durr_hoyer_min_emulated(neg_excl, eps, config, rng)
    tally.add(t2)
    cand = np.flatnonzero(values == values[nw_raw])
    next_worst = int(cand[0] if cand[0] != worst else cand[1])
    tally.classical_side_queries += N

    b_raw, t3 = durr_hoyer_min_emulated(values, eps, config, rng)
    tally.add(t3)
    best = int(np.flatnonzero(values == values[b_raw])[-1])
    tally.classical_side_queries += N
    if best == worst:  # all-equal degenerate case
        best = int([i for i in range(N) if i != worst][-1])
    return (worst, next_worst, best), tally
