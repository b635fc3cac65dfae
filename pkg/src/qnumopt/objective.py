"""Objective functions, the query-counting oracle, and finite-difference gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Point = np.ndarray


class DomainError(ValueError):
    """A point lies outside an objective function's domain box."""


@dataclass
class ObjectiveFunction:
    """A deterministic real-valued function on an axis-aligned box.

    Parameters
    ----------
    name : str
        Stable identifier (corpus name or ad-hoc label).
    dimension : int
        Number of coordinates n.
    evaluator : callable
        Maps an n-vector to a float.  Must be deterministic.
    domain : sequence of (lo, hi) pairs, optional
        Per-coordinate closed bounds.  Defaults to the unit hypercube.
    lipschitz_K : float, optional
        A valid Euclidean Lipschitz constant on the domain, if known.
    known_min : (point, value), optional
        Location and value of the global minimum, if known.
    analytic_gradient : callable, optional
        Maps an n-vector to the exact gradient.
    """

    name: str
    dimension: int
    evaluator: Callable[[Point], float]
    domain: Sequence[tuple[float, float]] | None = None
    lipschitz_K: Optional[float] = None
    known_min: Optional[tuple[Point, float]] = None
    analytic_gradient: Optional[Callable[[Point], Point]] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")
        if self.domain is None:
            self.domain = tuple((0.0, 1.0) for _ in range(self.dimension))
        else:
            self.domain = tuple((float(lo), float(hi)) for lo, hi in self.domain)
            if len(self.domain) != self.dimension:
                raise ValueError("domain length must equal dimension")
        if self.known_min is not None:
            pt, val = self.known_min
            self.known_min = (np.asarray(pt, dtype=float), float(val))

    @property
    def lower(self) -> Point:
        return np.array([lo for lo, _ in self.domain])

    @property
    def upper(self) -> Point:
        return np.array([hi for _, hi in self.domain])

    @property
    def widths(self) -> Point:
        return self.upper - self.lower

    def contains(self, x: Point) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clamp(self, x: Point) -> Point:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def raw(self, x: Point) -> float:
        """Evaluate without domain checks or counting (internal/test use)."""
        return float(self.evaluator(np.asarray(x, dtype=float)))


class CountingOracle:
    """Wraps an :class:`ObjectiveFunction` with an exact evaluation counter.

    Each oracle instance belongs to a single run; independent runs use
    independent oracles.  Wrapping never changes returned values.
    """

    def __init__(self, fn: ObjectiveFunction):
        self.fn = fn
        self.eval_count = 0

    def evaluate(self, x: Point, check_domain: bool = True) -> float:
        """Evaluate f(x), incrementing the counter by exactly 1.

        Raises :class:`DomainError` when ``check_domain`` is set and x lies
        outside the box.  Algorithms that rely on a function's natural
        extension beyond the box (line search, Nelder-Mead) pass
        ``check_domain=False``.
        """
        x = np.asarray(x, dtype=float)
        if check_domain and not self.fn.contains(x):
            raise DomainError(f"{x!r} outside domain of {self.fn.name!r}")
        self.eval_count += 1
        return float(self.fn.evaluator(x))

    __call__ = evaluate

    def evaluate_extended(self, x: Point) -> float:
        """Evaluate without a domain check (counts as one query)."""
        return self.evaluate(x, check_domain=False)

    def reset(self) -> None:
        self.eval_count = 0


def evaluate(oracle: CountingOracle, x: Point) -> float:
    """Domain-checked oracle evaluation; consumes exactly one query."""
    return oracle.evaluate(x)


def finite_diff_gradient(
    oracle: CountingOracle, x: Point, h: float, strict: bool = False
) -> Point:
    """Central-difference gradient estimate, consuming exactly 2n queries.

    Probe points x +/- h*e_i that leave the box are clamped to it by default,
    and the divided difference uses the actual probe separation.  With
    ``strict=True`` an out-of-domain probe raises :class:`DomainError`
    instead.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    fn = oracle.fn
    n = fn.dimension
    grad = np.empty(n)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        if not (fn.contains(xp) and fn.contains(xm)):
            if strict:
                raise DomainError(f"finite-difference probe leaves domain at coordinate {i}")
            xp = fn.clamp(xp)
            xm = fn.clamp(xm)
        sep = xp[i] - xm[i]
        if sep <= 0:
            raise DomainError(f"domain too thin for finite differences at coordinate {i}")
        grad[i] = (oracle.evaluate(xp) - oracle.evaluate(xm)) / sep
    return grad


@dataclass
class AveragedObjective:
    """A finite average f = (1/N) * sum_i f_i of component objectives.

    Components share a dimension and each has range inside [0, 1] (corpus
    families keep them inside [1/10, 9/10]).
    """

    components: list[ObjectiveFunction] = field(default_factory=list)

    def __post_init__(self):
        if not self.components:
            raise ValueError("AveragedObjective needs at least one component")
        dims = {f.dimension for f in self.components}
        if len(dims) != 1:
            raise ValueError(f"components disagree on dimension: {sorted(dims)}")

    @property
    def N(self) -> int:
        return len(self.components)

    @property
    def dimension(self) -> int:
        return self.components[0].dimension

    def mean(self, x: Point) -> float:
        x = np.asarray(x, dtype=float)
        return sum(f.raw(x) for f in self.components) / self.N

    def has_analytic_gradients(self) -> bool:
        return all(f.analytic_gradient is not None for f in self.components)

    def mean_gradient(self, x: Point) -> Point:
        if not self.has_analytic_gradients():
            raise ValueError("not all components provide an analytic gradient")
        x = np.asarray(x, dtype=float)
        g = np.zeros(self.dimension)
        for f in self.components:
            g += f.analytic_gradient(x)
        return g / self.N

    def mean_objective(self, name: str | None = None) -> ObjectiveFunction:
        """The average packaged as a plain :class:`ObjectiveFunction`."""
        grad = self.mean_gradient if self.has_analytic_gradients() else None
        return ObjectiveFunction(
            name=name or "mean",
            dimension=self.dimension,
            evaluator=self.mean,
            domain=self.components[0].domain,
            analytic_gradient=grad,
        )
