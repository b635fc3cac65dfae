"""Branch-and-bound for Lipschitzian optimisation with Galperin's cubic rules.

The search tiles the domain with dyadic hypercubes (side q^-k at level k),
bounds each region from below using the Lipschitz constant, and expands the
frontier best-first by lower bound.  Tree statistics (t_min, depth) feed the
quantum cost model.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qnumopt.objective import CountingOracle, Point

DEFAULT_DEPTH_LIMIT = 64  # corner integers stay exact in 64-bit at q=2


class DepthLimitError(RuntimeError):
    """Branching was requested past the configured depth limit."""


class NodeBudgetError(RuntimeError):
    """Node budget exceeded; carries the partial result in ``.partial``."""

    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class DyadicRegion:
    """Hypercube [corner_i / q^k, (corner_i + 1) / q^k] per coordinate (unit coords)."""

    level: int
    corner: tuple[int, ...]
    base: int = 2

    def __post_init__(self):
        q, k = self.base, self.level
        if q < 2:
            raise ValueError("base q must be >= 2")
        if k < 0:
            raise ValueError("level must be nonnegative")
        hi = q**k
        if any(c < 0 or c >= hi for c in self.corner):
            raise ValueError(f"corner {self.corner} out of range at level {k}")

    @property
    def dimension(self) -> int:
        return len(self.corner)

    @property
    def side(self) -> float:
        return float(self.base) ** (-self.level)

    def bounds_unit(self) -> tuple[np.ndarray, np.ndarray]:
        scale = float(self.base) ** (-self.level)
        lo = np.array(self.corner, dtype=float) * scale
        return lo, lo + scale

    def extreme_corners(self) -> list[tuple[int, ...]]:
        """Integer coordinates (at this level's grid) of the 2^n extreme points."""
        return [
            tuple(c + b for c, b in zip(self.corner, bits))
            for bits in itertools.product((0, 1), repeat=self.dimension)
        ]

    def corner_key(self, int_corner: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
        """Level-reduced exact key for a grid point, shared across levels."""
        key = []
        for a in int_corner:
            k = self.level
            while k > 0 and a % self.base == 0:
                a //= self.base
                k -= 1
            key.append((a, k))
        return tuple(key)

    def point_unit(self, int_corner: tuple[int, ...]) -> np.ndarray:
        return np.array(int_corner, dtype=float) * self.side


def galperin_branch(region: DyadicRegion, depth_limit: int = DEFAULT_DEPTH_LIMIT) -> list[DyadicRegion]:
    """Split a region into q^n equal children at level k+1, tiling the parent."""
    q = region.base
    if region.level + 1 > depth_limit:
        raise DepthLimitError(f"branching past depth limit {depth_limit}")
    children = []
    for offs in itertools.product(range(q), repeat=region.dimension):
        corner = tuple(q * c + o for c, o in zip(region.corner, offs))
        children.append(DyadicRegion(region.level + 1, corner, q))
    return children


class _CornerCache:
    """Memoised corner evaluations keyed by the level-reduced grid point."""

    def __init__(self, oracle: CountingOracle):
        self.oracle = oracle
        self.fn = oracle.fn
        self._lo = self.fn.lower
        self._w = self.fn.widths
        self.values: dict = {}

    def value(self, region: DyadicRegion, int_corner: tuple[int, ...]) -> tuple[float, np.ndarray]:
        key = region.corner_key(int_corner)
        hit = self.values.get(key)
        if hit is not None:
            return hit
        u = region.point_unit(int_corner)
        x = self._lo + u * self._w
        v = self.oracle.evaluate(self.fn.clamp(x))
        self.values[key] = (v, x)
        return v, x


def _diag(oracle: CountingOracle, region: DyadicRegion) -> float:
    """Physical corner-to-corner diameter of the region (sqrt(n) q^-k on the unit cube)."""
    return region.side * float(np.linalg.norm(oracle.fn.widths))


def galperin_lower_bound(
    oracle: CountingOracle, region: DyadicRegion, K: float, cache: Optional[_CornerCache] = None
) -> float:
    """max over extreme points x0 of f(x0) - K * diam(region).

    Consumes at most 2^n queries; corner values shared across sibling regions
    when a cache is supplied.
    """
    if K < 0:
        raise ValueError("Lipschitz constant must be nonnegative")
    cache = cache or _CornerCache(oracle)
    best = -math.inf
    for ic in region.extreme_corners():
        v, _ = cache.value(region, ic)
        best = max(best, v)
    return best - K * _diag(oracle, region)


def galperin_upper_bound(
    oracle: CountingOracle, region: DyadicRegion, cache: Optional[_CornerCache] = None
) -> tuple[float, np.ndarray]:
    """Minimum of f over the 2^n extreme points, with its location."""
    cache = cache or _CornerCache(oracle)
    best_v, best_x = math.inf, None
    for ic in region.extreme_corners():
        v, x = cache.value(region, ic)
        if v < best_v:
            best_v, best_x = v, x
    return best_v, best_x


@dataclass
class Subproblem:
    """A frontier entry: region plus its cached bounds."""

    region: DyadicRegion
    lower_bound: float
    local_best: tuple[np.ndarray, float]


@dataclass
class BnbNode:
    level: int
    corner: tuple[int, ...]
    lower: float
    upper: float
    parent: Optional[int]
    branched: bool = False


@dataclass
class BnbStats:
    nodes_expanded: int = 0
    nodes_branched: int = 0
    max_depth: int = 0
    t_min: int = 0
    f_opt: float = math.inf
    x_opt: Optional[Point] = None
    tree_log: list[BnbNode] = field(default_factory=list)
    queries_charged: int = 0
    queries_actual: int = 0
    status: str = ""

    def tree_as_dicts(self) -> list[dict]:
        return [
            {
                "level": v.level,
                "corner": list(v.corner),
                "L": v.lower,
                "upper": v.upper,
                "parent_index": v.parent,
            }
            for v in self.tree_log
        ]


def compute_tmin(stats: BnbStats, threshold: Optional[float] = None) -> int:
    """Count tree vertices with lower bound <= threshold (default: the run's f_opt).

    A vertex only counts when its whole ancestor chain also qualifies, i.e.
    the count is the size of the tree truncated below disqualified vertices.
    With a valid Lipschitz constant child bounds never undercut the parent's,
    so the chain condition is then equivalent to the plain count.
    """
    thr = stats.f_opt if threshold is None else threshold
    ok = [False] * len(stats.tree_log)
    count = 0
    for i, v in enumerate(stats.tree_log):
        if v.lower <= thr and (v.parent is None or ok[v.parent]):
            ok[i] = True
            count += 1
    return count


def bnb_minimize(
    oracle: CountingOracle,
    K: float,
    eps: float,
    q: int = 2,
    max_nodes: Optional[int] = None,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
    strict_prune: bool = False,
    early_stop: bool = True,
) -> tuple[float, Point, BnbStats]:
    """Best-first branch-and-bound minimisation to additive accuracy eps.

    The frontier is ordered by lower bound (ties by level, then lexicographic
    corner).  Regions whose own upper/lower gap is within eps become leaves;
    regions with L >= f_opt - eps are pruned (with ``strict_prune`` the
    literal rule L >= f_opt applies instead).  ``early_stop=False`` drains the
    frontier completely, which makes the logged tree match an independent
    recursive enumeration (used by the t_min consistency checks).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = oracle.fn.dimension
    cache = _CornerCache(oracle)
    start_count = oracle.eval_count
    stats = BnbStats()

    root = DyadicRegion(0, (0,) * n, q)
    upper, x_up = galperin_upper_bound(oracle, root, cache)
    lower = galperin_lower_bound(oracle, root, K, cache)
    f_opt, x_opt = upper, x_up
    stats.tree_log.append(BnbNode(0, root.corner, lower, upper, None))

    heap: list = []
    if f_opt - lower > eps:
        heapq.heappush(heap, (lower, root.level, root.corner, 0, root))

    def prune_threshold():
        return f_opt if strict_prune else f_opt - eps

    while heap:
        L_min = heap[0][0]
        if early_stop and f_opt - L_min <= eps:
            stats.status = "optimal"
            break
        L, _, _, idx, region = heapq.heappop(heap)
        if L >= prune_threshold():
            continue
        if max_nodes is not None and len(stats.tree_log) + q**n > max_nodes:
            stats.status = "budget"
            _finalize(stats, oracle, start_count, f_opt, x_opt, n)
            raise NodeBudgetError(f"node budget {max_nodes} exceeded", (f_opt, x_opt, stats))
        stats.tree_log[idx].branched = True
        stats.nodes_branched += 1
        for child in galperin_branch(region, depth_limit):
            c_upper, c_xup = galperin_upper_bound(oracle, child, cache)
            c_lower = galperin_lower_bound(oracle, child, K, cache)
            if c_upper < f_opt:
                f_opt, x_opt = c_upper, c_xup
            child_idx = len(stats.tree_log)
            stats.tree_log.append(BnbNode(child.level, child.corner, c_lower, c_upper, idx))
            if c_upper - c_lower <= eps:
                continue  # resolved: leaf
            if c_lower >= prune_threshold():
                continue
            heapq.heappush(heap, (c_lower, child.level, child.corner, child_idx, child))
    else:
        stats.status = "drained"

    _finalize(stats, oracle, start_count, f_opt, x_opt, n)
    return f_opt, x_opt, stats


def _finalize(stats: BnbStats, oracle, start_count, f_opt, x_opt, n):
    stats.f_opt = f_opt
    stats.x_opt = x_opt
    stats.nodes_expanded = len(stats.tree_log)
    stats.max_depth = max(v.level for v in stats.tree_log)
    stats.queries_actual = oracle.eval_count - start_count
    stats.queries_charged = (2**n) * len(stats.tree_log)
    stats.t_min = compute_tmin(stats)


def quantum_bnb_cost(t_min: int, d: int, n: int, tf: float) -> float:
    """sqrt(t_min) * d^(3/2) * 2^n * tf, the quantum cost body with unit constant."""
    if t_min < 1 or d < 1:
        raise ValueError("t_min and d must be >= 1")
    return math.sqrt(t_min) * d**1.5 * 2.0**n * tf


def classical_bnb_cost(t_min: int, n: int, tf: float) -> float:
    """t_min * 2^n * tf, the classical cost body with unit constant."""
    return t_min * 2.0**n * tf


def bnb_polylog(d: int, eps: float) -> float:
    """Hidden polylog factor log2(d) * log2(1/eps), clamped below at 1."""
    return max(1.0, math.log2(max(d, 1)) * math.log2(max(1.0 / eps, 1.0)))
