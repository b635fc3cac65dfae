"""Nelder-Mead simplex minimisation (Lagarias parameterisation).

Index convention follows the source algorithm: among the n+1 vertices,
x_0 is the WORST (largest f) and x_n the BEST, i.e. the conceptual ordering
is f(x_0) >= f(x_1) >= ... >= f(x_n).  Vertices are stored unsorted; the
worst / next-worst / best identities are maintained explicitly, with ties
resolved by the stable descending order (equal values keep index order).

The centroid of all-but-worst is maintained incrementally from a running
point sum.  A quantum mode replaces the fresh sorts (at initialisation and
after shrink steps, the only places where all n+1 values are new) with
emulated minimum-finding runs and charges their queries separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qnumopt.emulators import EmulatorConfig, QueryTally, identify_extremes_emulated
from qnumopt.objective import CountingOracle, Point

STEP_LABELS = ("reflect", "expand", "outside-contract", "inside-contract", "shrink")


@dataclass
class NMConfig:
    alpha: float = 1.0  # reflection
    beta: float = 2.0  # expansion
    gamma: float = 0.5  # contraction
    delta: float = 0.5  # shrink
    f_tol: float = 1e-8  # spread of vertex values
    x_tol: float = 0.0  # spread of vertices around the best (0 disables)
    k_max: int = 500

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 1 and self.beta > self.alpha):
            raise ValueError("need alpha > 0 and beta > max(1, alpha)")
        if not (0 < self.gamma < 1 and 0 < self.delta < 1):
            raise ValueError("gamma and delta must lie in (0, 1)")


class Simplex:
    """n+1 vertices with cached values, extreme identities, and running point sum."""

    def __init__(self, points: np.ndarray, values: np.ndarray):
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        m, n = points.shape
        if m != n + 1:
            raise ValueError("simplex needs n+1 points in n dimensions")
        self.points = points
        self.values = values
        self.point_sum = points.sum(axis=0)
        self.worst = 0
        self.next_worst = 0
        self.best = 0
        self.resort()

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def centroid(self) -> np.ndarray:
        """Mean of all vertices except the worst, from the running sum."""
        return (self.point_sum - self.points[self.worst]) / self.n

    def resort(self, identities: Optional[tuple[int, int, int]] = None) -> None:
        if identities is None:
            order = np.lexsort((np.arange(len(self.values)), -self.values))
            self.worst, self.next_worst, self.best = int(order[0]), int(order[1]), int(order[-1])
        else:
            self.worst, self.next_worst, self.best = identities

    def replace_worst(self, point: np.ndarray, value: float) -> None:
        self.point_sum = self.point_sum - self.points[self.worst] + point
        self.points[self.worst] = point
        self.values[self.worst] = value
        self.resort()

    def f_spread(self) -> float:
        return float(self.values.max() - self.values.min())

    def x_spread(self) -> float:
        return float(np.max(np.abs(self.points - self.points[self.best])))


def right_angled_simplex(x0: Point, scale: float, n: int) -> np.ndarray:
    pts = np.tile(np.asarray(x0, dtype=float), (n + 1, 1))
    for i in range(n):
        pts[i + 1, i] += scale
    return pts


def centroid_after_replace(simplex: Simplex, new_worst_index: int) -> np.ndarray:
    """Centroid from the already-updated point sum, one O(n) pass."""
    return (simplex.point_sum - simplex.points[new_worst_index]) / simplex.n


def shrink_centroid_update(c: np.ndarray, delta: float, x_best: np.ndarray) -> np.ndarray:
    """Image of the old centroid under a shrink: c' = delta*c + (1-delta)*x_best."""
    return delta * c + (1.0 - delta) * x_best


@dataclass
class NMStats:
    k: int = 0
    s: int = 0
    step_labels: list[str] = field(default_factory=list)
    queries_classical: int = 0
    queries_quantum_emulated: int = 0

    def record(self, label: str):
        self.step_labels.append(label)
        self.k = len(self.step_labels)
        if label == "shrink":
            self.s += 1


def nm_step(simplex: Simplex, oracle: CountingOracle, config: NMConfig) -> str:
    """One reflect / expand / contract / shrink move; returns the step label."""
    ev = lambda p: oracle.evaluate(p, check_domain=False)
    return _nm_step_impl(simplex, ev, ev, config, identities=None)


def _nm_step_impl(simplex, ev, ev_bulk, config: NMConfig, identities) -> str:
    w, nw, b = simplex.worst, simplex.next_worst, simplex.best
    x0, f0 = simplex.points[w], simplex.values[w]
    f1 = simplex.values[nw]
    fb = simplex.values[b]
    c = simplex.centroid

    xr = c + config.alpha * (c - x0)
    fr = ev(xr)
    if fb <= fr < f1:
        simplex.replace_worst(xr, fr)
        return "reflect"
    if fr < fb:
        xe = c + config.beta * (xr - c)
        fe = ev(xe)
        if fe < fr:
            simplex.replace_worst(xe, fe)
        else:
            simplex.replace_worst(xr, fr)
        return "expand"
    if f1 <= fr < f0:
        xc = c + config.gamma * (xr - c)
        fc = ev(xc)
        if fc <= fr:
            simplex.replace_worst(xc, fc)
            return "outside-contract"
    else:  # fr >= f0
        xc = c - config.gamma * (c - x0)
        fc = ev(xc)
        if fc < f0:
            simplex.replace_worst(xc, fc)
            return "inside-contract"
    _shrink(simplex, ev_bulk, config, identities)
    return "shrink"


def _shrink(simplex, ev_bulk, config, identities):
    b = simplex.best
    xb = simplex.points[b]
    for i in range(len(simplex.values)):
        if i == b:
            continue
        simplex.points[i] = config.delta * simplex.points[i] + (1.0 - config.delta) * xb
        simplex.values[i] = ev_bulk(simplex.points[i])
    simplex.point_sum = simplex.points.sum(axis=0)  # O(n^2) rebuild
    simplex.resort(identities() if identities else None)


def _terminated(simplex: Simplex, config: NMConfig) -> bool:
    if simplex.f_spread() <= config.f_tol:
        return True
    if config.x_tol > 0 and simplex.x_spread() <= config.x_tol:
        return True
    return False


def nm_minimize(
    oracle: CountingOracle,
    x0: Point,
    config: Optional[NMConfig] = None,
    scale: Optional[float] = None,
    simplex_points: Optional[np.ndarray] = None,
) -> tuple[Point, NMStats, list[dict]]:
    """Classical Nelder-Mead from a right-angled simplex at x0 (or explicit points)."""
    config = config or NMConfig()
    n = oracle.fn.dimension
    if simplex_points is None:
        if scale is None:
            scale = 0.05 * float(np.linalg.norm(oracle.fn.widths))
        simplex_points = right_angled_simplex(x0, scale, n)
    start = oracle.eval_count
    values = np.array([oracle.evaluate(p, check_domain=False) for p in simplex_points])
    simplex = Simplex(simplex_points, values)
    stats = NMStats()
    trace = []
    while stats.k < config.k_max and not _terminated(simplex, config):
        before = oracle.eval_count
        label = nm_step(simplex, oracle, config)
        stats.record(label)
        trace.append(
            {
                "iter": stats.k,
                "label": label,
                "f_best": float(simplex.values[simplex.best]),
                "f_worst": float(simplex.values[simplex.worst]),
                "queries_classical": oracle.eval_count - before,
                "queries_quantum": 0,
            }
        )
    stats.queries_classical = oracle.eval_count - start
    return simplex.points[simplex.best].copy(), stats, trace


def nm_quantum_mode(
    oracle: CountingOracle,
    x0: Point,
    config: Optional[NMConfig] = None,
    emulator: Optional[EmulatorConfig] = None,
    k_budget: int = 500,
    scale: Optional[float] = None,
    simplex_points: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[Point, NMStats, list[dict]]:
    """Nelder-Mead whose fresh sorts use emulated minimum finding.

    At initialisation and after every shrink, worst / next-worst / best are
    located by three emulated runs over the n+1 vertex values (per-run target
    failure probability 1/k_budget).  Vertex values are computed as emulator
    side information; trial points along the walk are charged to the oracle
    as in the classical mode, so the two modes share the step-label sequence
    whenever every emulated identification succeeds.
    """
    config = config or NMConfig()
    emulator = emulator or EmulatorConfig()
    rng = rng or np.random.default_rng(emulator.seed)
    n = oracle.fn.dimension
    if simplex_points is None:
        if scale is None:
            scale = 0.05 * float(np.linalg.norm(oracle.fn.widths))
        simplex_points = right_angled_simplex(x0, scale, n)

    stats = NMStats()
    tally = QueryTally()

    values = np.array([oracle.fn.raw(p) for p in simplex_points])
    tally.classical_side_queries += len(values)
    simplex = Simplex(simplex_points, values)

    def emulated_identities():
        ids, t = identify_extremes_emulated(simplex.values, k_budget, emulator, rng)
        tally.add(t)
        return ids

    simplex.resort(emulated_identities())
    start = oracle.eval_count
    ev = lambda p: oracle.evaluate(p, check_domain=False)

    def ev_bulk(p):  # shrink re-evaluations are emulator side information
        tally.classical_side_queries += 1
        return oracle.fn.raw(p)

    trace = []
    while stats.k < config.k_max and not _terminated(simplex, config):
        before_c = oracle.eval_count
        before_q = tally.oracle_queries
        label = _nm_step_impl(simplex, ev, ev_bulk, config, identities=emulated_identities)
        stats.record(label)
        trace.append(
            {
                "iter": stats.k,
                "label": label,
                "f_best": float(simplex.values[simplex.best]),
                "f_worst": float(simplex.values[simplex.worst]),
                "queries_classical": oracle.eval_count - before_c,
                "queries_quantum": tally.oracle_queries - before_q,
            }
        )
    stats.queries_classical = oracle.eval_count - start
    stats.queries_quantum_emulated = tally.oracle_queries
    return simplex.points[simplex.best].copy(), stats, trace


def nm_cost_models(k: int, s: int, n: int, tf: float, log_k: float) -> tuple[float, float]:
    """Classical and quantum iteration-cost bodies with unit constants:
    (s+1)(n^2 + n tf) + k(n + tf)  vs  (s+1)(n^2 + sqrt(n) tf log_k) + k(n + tf)."""
    if min(k, s + 1, n) < 1 or tf < 1 or log_k < 1:
        raise ValueError("all cost parameters must be >= 1 (s >= 0)")
    classical = (s + 1) * (n**2 + n * tf) + k * (n + tf)
    quantum = (s + 1) * (n**2 + math.sqrt(n) * tf * log_k) + k * (n + tf)
    return float(classical), float(quantum)
