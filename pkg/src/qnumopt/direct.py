"""The DIRECT (dividing rectangles) optimiser.

Maintains a partition of the unit hypercube into hyperrectangles whose sides
are powers of 1/3, samples f only at rectangle centres, and each sweep
trisects every "potentially optimal" rectangle: one admitting a surrogate
Lipschitz constant K > 0 under which its centre-minus-K*d value is
simultaneously best over the partition and nontrivially below the incumbent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qnumopt.objective import CountingOracle, Point


@dataclass
class DirectRect:
    """A partition cell: centre, per-dimension trisection counts, cached value.

    Side length in dimension i is 3^-third_counts[i]; d is the distance from
    the centre to any vertex.
    """

    center: np.ndarray  # unit coordinates
    third_counts: np.ndarray  # nonnegative ints
    f_center: float

    @property
    def d(self) -> float:
        return 0.5 * math.sqrt(float(np.sum(3.0 ** (-2.0 * self.third_counts))))

    def sides(self) -> np.ndarray:
        return 3.0 ** (-self.third_counts.astype(float))

    def group_key(self) -> tuple[int, ...]:
        """Exact key for 'same d': the sorted multiset of trisection counts."""
        return tuple(sorted(int(t) for t in self.third_counts))


@dataclass
class PartitionState:
    rects: list[DirectRect]
    f_min: float
    x_min: np.ndarray  # unit coordinates
    eps_direct: float = 1e-4
    iteration: int = 0

    @property
    def m(self) -> int:
        return len(self.rects)


def _sample(state_lo, state_w, oracle: CountingOracle, u: np.ndarray) -> float:
    x = state_lo + u * state_w
    return oracle.evaluate(oracle.fn.clamp(x))


def initial_state(oracle: CountingOracle, eps_direct: float = 1e-4) -> PartitionState:
    """Sample the centre of the domain box and start the partition."""
    n = oracle.fn.dimension
    c = np.full(n, 0.5)
    fc = _sample(oracle.fn.lower, oracle.fn.widths, oracle, c)
    rect = DirectRect(center=c, third_counts=np.zeros(n, dtype=int), f_center=fc)
    return PartitionState(rects=[rect], f_min=fc, x_min=c.copy(), eps_direct=eps_direct)


def potentially_optimal(state: PartitionState) -> list[int]:
    """Indices of the potentially optimal rectangles, in ascending index order.

    Rectangles are grouped by exact side-length multiset (equal d); only each
    group's minimum-f member enters the lower convex hull of (d, f) points.
    Hull vertices must admit K > 0 between their neighbouring hull slopes and
    pass the anchor test f(c_j) - K*d_j <= f_min - eps*|f_min| at the largest
    admissible K.  Equal-(d, f) ties within a selected group are all returned.
    """
    if not state.rects:
        raise ValueError("empty partition")
    groups: dict[tuple, list[int]] = {}
    for i, r in enumerate(state.rects):
        groups.setdefault(r.group_key(), []).append(i)

    reps = []  # (d, f, group key) for each group's best member
    for key, idxs in groups.items():
        fbest = min(state.rects[i].f_center for i in idxs)
        reps.append((state.rects[idxs[0]].d, fbest, key))
    reps.sort(key=lambda t: t[0])

    # Lower convex hull over the representatives, keeping collinear points.
    hull: list[tuple[float, float, tuple]] = []
    for p in reps:
        while len(hull) >= 2:
            (d0, f0, _), (d1, f1, _) = hull[-2], hull[-1]
            if (d1 - d0) * (p[1] - f0) - (f1 - f0) * (p[0] - d0) < 0:
                hull.pop()
            else:
                break
        hull.append(p)

    anchor = state.f_min - state.eps_direct * abs(state.f_min)
    selected_keys = []
    for j, (d_j, f_j, key) in enumerate(hull):
        if j + 1 < len(hull):
            d_next, f_next, _ = hull[j + 1]
            k_max = (f_next - f_j) / (d_next - d_j)
            if k_max <= 0:
                continue
            if f_j - k_max * d_j > anchor:
                continue
        # rightmost hull point: any large K works for both conditions
        if j > 0:
            d_prev, f_prev, _ = hull[j - 1]
            if (f_j - f_prev) / (d_j - d_prev) > (math.inf if j + 1 == len(hull) else k_max):
                continue
        selected_keys.append((key, f_j))

    out = []
    for key, fbest in selected_keys:
        for i in groups[key]:
            if state.rects[i].f_center == fbest:
                out.append(i)
    return sorted(out)


def trisect(state: PartitionState, rect_index: int, oracle: CountingOracle) -> PartitionState:
    """Divide one rectangle into thirds along all of its longest dimensions.

    Samples f at c +/- delta*e_i for each longest dimension i (2|I| queries),
    then divides in ascending order of w_i = min(f(c+delta e_i), f(c-delta e_i));
    ties broken by dimension index.  The centre rectangle keeps c.
    """
    if rect_index < 0 or rect_index >= len(state.rects):
        raise IndexError(f"no rectangle {rect_index}")
    rect = state.rects[rect_index]
    lo, w = oracle.fn.lower, oracle.fn.widths
    t_min = int(np.min(rect.third_counts))
    dims = [i for i in range(len(rect.center)) if rect.third_counts[i] == t_min]
    delta = 3.0 ** (-(t_min + 1))

    samples = {}
    for i in dims:
        for sgn in (+1.0, -1.0):
            u = rect.center.copy()
            u[i] += sgn * delta
            fv = _sample(lo, w, oracle, u)
            samples[(i, sgn)] = (u, fv)
            if fv < state.f_min:
                state.f_min = fv
                state.x_min = u.copy()

    order = sorted(dims, key=lambda i: (min(samples[(i, +1.0)][1], samples[(i, -1.0)][1]), i))

    counts = rect.third_counts.copy()
    for i in order:
        counts[i] += 1
        for sgn in (+1.0, -1.0):
            u, fv = samples[(i, sgn)]
            state.rects.append(DirectRect(center=u, third_counts=counts.copy(), f_center=fv))
    state.rects[rect_index] = DirectRect(center=rect.center, third_counts=counts.copy(), f_center=rect.f_center)
    return state


@dataclass
class DirectResult:
    f_min: float
    x_min: Point  # original (physical) coordinates
    history: list[dict] = field(default_factory=list)
    state: Optional[PartitionState] = None


def direct_minimize(oracle: CountingOracle, eps_direct: float = 1e-4, T: int = 50) -> DirectResult:
    """Run T sweeps; each sweep trisects every potentially optimal rectangle once."""
    if T < 1:
        raise ValueError("iteration limit T must be >= 1")
    state = initial_state(oracle, eps_direct)
    history = []
    for t in range(1, T + 1):
        state.iteration = t
        selected = potentially_optimal(state)
        for j in selected:
            trisect(state, j, oracle)
        history.append({"t": t, "m": state.m, "f_min": state.f_min, "selected": selected})
    x_phys = oracle.fn.lower + state.x_min * oracle.fn.widths
    return DirectResult(f_min=state.f_min, x_min=x_phys, history=history, state=state)


def partition_snapshot(state: PartitionState) -> list[dict]:
    """JSON-ready snapshot of the partition."""
    return [
        {
            "center": [float(v) for v in r.center],
            "third_counts": [int(t) for t in r.third_counts],
            "f_center": r.f_center,
            "d_j": r.d,
        }
        for r in state.rects
    ]


def scatter_rows(state: PartitionState) -> list[tuple[float, float, int]]:
    """(d_j, f_center, selected_flag) rows: the scatter-and-hull data."""
    sel = set(potentially_optimal(state))
    return [(r.d, r.f_center, int(i in sel)) for i, r in enumerate(state.rects)]
