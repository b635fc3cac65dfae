"""Mini-batch gradient estimation and SGD for averaged objectives.

The averaged objective f = (1/N) sum_i f_i is sampled with replacement;
batch sizes come from an explicit Hoeffding bound (per-coordinate tails plus
a union bound over the n coordinates), instantiating the O(eps^-2 log(n/del))
sample-complexity form with concrete constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from qnumopt.objective import AveragedObjective, ObjectiveFunction, Point


@dataclass
class GradAccuracySpec:
    eps: float  # target accuracy in the max norm
    delta: float  # failure probability
    bound_B: float = 1.0  # per-sample partial-derivative bound

    def __post_init__(self):
        if self.eps <= 0 or not 0 < self.delta < 1:
            raise ValueError("need eps > 0 and delta in (0, 1)")
        if self.bound_B <= 0:
            raise ValueError("bound_B must be positive")


@dataclass
class SampledGradient:
    estimate: np.ndarray
    batch_size: int
    seed: tuple
    queries_charged: int


def required_batch_size(spec: GradAccuracySpec, n: int) -> int:
    """ceil(2 B^2 eps^-2 ln(2n/delta)): Hoeffding on [-B, B] per coordinate,
    two tails, union bound over n coordinates."""
    if n < 1:
        raise ValueError("n must be positive")
    return math.ceil(2.0 * spec.bound_B**2 * spec.eps**-2 * math.log(2.0 * n / spec.delta))


def minibatch_gradient(
    avg: AveragedObjective,
    x: Point,
    k_b: int,
    seed,
    h: float = 1e-5,
) -> SampledGradient:
    """Average of k_b with-replacement per-sample gradients at x.

    Per-sample gradients are analytic when every component provides one
    (1 charged query per sample), else central differences with a shared
    step h (2n charged queries per sample).  Reproducible from the seed;
    the reduction order is fixed.
    """
    if k_b < 1:
        raise ValueError("batch size must be >= 1")
    x = np.asarray(x, dtype=float)
    n = avg.dimension
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, avg.N, size=k_b)
    total = np.zeros(n)
    analytic = avg.has_analytic_gradients()
    for i in idx:
        comp = avg.components[int(i)]
        if analytic:
            total += comp.analytic_gradient(x)
        else:
            total += _central_diff(comp, x, h)
    queries = k_b if analytic else 2 * n * k_b
    return SampledGradient(
        estimate=total / k_b,
        batch_size=k_b,
        seed=tuple(np.atleast_1d(seed)),
        queries_charged=queries,
    )


def _central_diff(fn: ObjectiveFunction, x: Point, h: float) -> np.ndarray:
    g = np.empty(fn.dimension)
    for j in range(fn.dimension):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        g[j] = (fn.raw(xp) - fn.raw(xm)) / (2 * h)
    return g


def sgd_minimize(
    avg: AveragedObjective,
    x0: Point,
    eta: Union[float, Callable[[int], float]],
    steps: int,
    spec: GradAccuracySpec,
    seed: int = 0,
    k_b: Optional[int] = None,
    linf_perturbation: float = 0.0,
    probe_f: bool = True,
) -> list[dict]:
    """Iterate x <- x - eta_t * g_hat with mini-batch gradients.

    The batch size defaults to required_batch_size(spec, n).  Each step's
    sampling stream derives from (seed, t), so trajectories are reproducible.
    ``linf_perturbation`` adds uniform noise of that magnitude per coordinate
    to each gradient estimate (an experiment mode for studying max-norm
    approximate gradients; no convergence claim attaches to it).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = np.asarray(x0, dtype=float).copy()
    n = avg.dimension
    if k_b is None:
        k_b = required_batch_size(spec, n)
    rate = eta if callable(eta) else (lambda t: eta)
    trajectory = [{
        "t": 0, "x": x.copy(), "f_probe": avg.mean(x) if probe_f else None,
        "k_b": k_b, "queries": 0,
    }]
    total_queries = 0
    for t in range(1, steps + 1):
        g = minibatch_gradient(avg, x, k_b, seed=[seed, t])
        est = g.estimate
        if linf_perturbation > 0:
            noise_rng = np.random.default_rng([seed, t, 1])
            est = est + noise_rng.uniform(-linf_perturbation, linf_perturbation, size=n)
        x = x - rate(t) * est
        total_queries += g.queries_charged
        trajectory.append({
            "t": t, "x": x.copy(), "f_probe": avg.mean(x) if probe_f else None,
            "k_b": k_b, "queries": total_queries,
        })
    return trajectory


def range_transform(
    fn: ObjectiveFunction, observed_lo: float, observed_hi: float
) -> ObjectiveFunction:
    """Affine rescaling sending [observed_lo, observed_hi] onto [1/10, 9/10].

    Strictly increasing, so the argmin is preserved.
    """
    if not observed_lo < observed_hi:
        raise ValueError("need observed_lo < observed_hi")
    scale = 0.8 / (observed_hi - observed_lo)

    def g(x, _f=fn.evaluator):
        return 0.1 + scale * (float(_f(x)) - observed_lo)

    grad = None
    if fn.analytic_gradient is not None:
        grad = lambda x, _g=fn.analytic_gradient: scale * np.asarray(_g(x))
    known = None
    if fn.known_min is not None:
        known = (fn.known_min[0], 0.1 + scale * (fn.known_min[1] - observed_lo))
    K = None if fn.lipschitz_K is None else scale * fn.lipschitz_K
    return ObjectiveFunction(
        name=f"{fn.name}-unit-range",
        dimension=fn.dimension,
        evaluator=g,
        domain=fn.domain,
        lipschitz_K=K,
        known_min=known,
        analytic_gradient=grad,
    )


def _stencil_estimates(f: Callable[[Point], float], x: Point, n: int, order: int, h: float):
    """|partial_alpha f(x)| estimates for all multi-indices of the given order."""
    out = {}
    if order >= 1:
        for j in range(n):
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            out[(j,)] = abs((f(xp) - f(xm)) / (2 * h))
    if order >= 2:
        fx = f(x)
        for j in range(n):
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            out[(j, j)] = abs((f(xp) - 2 * fx + f(xm)) / h**2)
            for l in range(j + 1, n):
                xpp, xpm, xmp, xmm = x.copy(), x.copy(), x.copy(), x.copy()
                xpp[[j, l]] += h
                xmm[[j, l]] -= h
                xpm[j] += h
                xpm[l] -= h
                xmp[j] -= h
                xmp[l] += h
                out[(j, l)] = abs((f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * h**2))
    return out


def averaged_derivative_bound_check(
    avg: AveragedObjective,
    x: Point,
    order: int = 2,
    c: Optional[float] = None,
    h: float = 1e-3,
    tol: float = 1e-4,
) -> bool:
    """Finite-difference check that averaging cannot inflate derivative bounds.

    For every multi-index alpha up to the given order, the estimate of
    |partial_alpha f| for the mean must not exceed the maximum over the
    components' estimates (plus tolerance).  When ``c`` is supplied and all
    components obey |partial_alpha f_i| <= c^k k^(k/2) empirically, the mean
    must obey it too.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    x = np.asarray(x, dtype=float)
    n = avg.dimension
    mean_est = _stencil_estimates(avg.mean, x, n, order, h)
    comp_est = [_stencil_estimates(f.raw, x, n, order, h) for f in avg.components]
    for alpha, val in mean_est.items():
        cap = max(est[alpha] for est in comp_est)
        if val > cap + tol:
            return False
        if c is not None:
            k = len(alpha)
            claim = c**k * k ** (k / 2)
            if all(est[alpha] <= claim + tol for est in comp_est) and val > claim + tol:
                return False
    return True


def quantum_gradient_cost(n: int, tf: float, eps: float, delta: float = 0.01) -> tuple[float, float]:
    """(quantum, classical) cost bodies: sqrt(n) tf / eps  vs  n tf eps^-2 ln(2n/delta)."""
    if n < 1 or tf <= 0 or eps <= 0:
        raise ValueError("all cost parameters must be positive")
    quantum = math.sqrt(n) * tf / eps
    classical = n * tf * eps**-2 * math.log(2.0 * n / delta)
    return quantum, classical


def gradient_polylog(n: int, eps: float) -> float:
    """Hidden polylog factor of the quantum gradient bound, clamped below at 1."""
    return max(1.0, math.log2(max(2.0, n / eps)))
