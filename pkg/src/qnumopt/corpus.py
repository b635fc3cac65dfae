"""Built-in test corpus: named objective functions with known constants.

Names are stable strings.  Families are parameterised by dimension using a
``family-n`` grammar ("sphere-3", "avg-quadratics-4-2" = N=4 components in
n=2 dimensions).
"""

from __future__ import annotations

import json
import re

import numpy as np

from qnumopt.objective import AveragedObjective, ObjectiveFunction


class CorpusLookupError(KeyError):
    """Unknown corpus name."""


_ANCHOR_CYCLE = (0.3, 0.55, 0.4, 0.7, 0.25)  # piecewise-linear kink locations


def _fig1() -> ObjectiveFunction:
    # 3x^2 - 2x on [0,1]; |f'| = |6x-2| <= 4, minimum -1/3 at x = 1/3.
    return ObjectiveFunction(
        name="fig1",
        dimension=1,
        evaluator=lambda x: 3.0 * x[0] * x[0] - 2.0 * x[0],
        domain=[(0.0, 1.0)],
        lipschitz_K=4.0,
        known_min=(np.array([1.0 / 3.0]), -1.0 / 3.0),
        analytic_gradient=lambda x: np.array([6.0 * x[0] - 2.0]),
    )


def _sphere(n: int) -> ObjectiveFunction:
    # sum x_i^2 on [0,1]^n; ||grad|| = 2||x|| <= 2 sqrt(n).
    return ObjectiveFunction(
        name=f"sphere-{n}",
        dimension=n,
        evaluator=lambda x: float(np.dot(x, x)),
        domain=[(0.0, 1.0)] * n,
        lipschitz_K=2.0 * np.sqrt(n),
        known_min=(np.zeros(n), 0.0),
        analytic_gradient=lambda x: 2.0 * x,
    )


def _rosenbrock(n: int) -> ObjectiveFunction:
    if n < 2:
        raise CorpusLookupError("rosenbrock needs n >= 2")

    def f(x):
        return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))

    def grad(x):
        g = np.zeros_like(x)
        g[:-1] = -400.0 * x[:-1] * (x[1:] - x[:-1] ** 2) - 2.0 * (1.0 - x[:-1])
        g[1:] += 200.0 * (x[1:] - x[:-1] ** 2)
        return g

    # No exact Lipschitz constant recorded; too large to be useful for
    # branch-and-bound anyway.
    return ObjectiveFunction(
        name=f"rosenbrock-{n}",
        dimension=n,
        evaluator=f,
        domain=[(-2.048, 2.048)] * n,
        known_min=(np.ones(n), 0.0),
        analytic_gradient=grad,
    )


def _piecewise_linear(n: int) -> ObjectiveFunction:
    # max_i |x_i - a_i| is 1-Lipschitz in the Euclidean norm, exactly.
    a = np.array([_ANCHOR_CYCLE[i % len(_ANCHOR_CYCLE)] for i in range(n)])
    return ObjectiveFunction(
        name=f"piecewise-linear-{n}",
        dimension=n,
        evaluator=lambda x: float(np.max(np.abs(x - a))),
        domain=[(0.0, 1.0)] * n,
        lipschitz_K=1.0,
        known_min=(a.copy(), 0.0),
    )


def _avg_quadratics(N: int, n: int) -> AveragedObjective:
    """N shifted quadratics on [0,1]^n, each with range in [1/10, 9/10].

    Component i is f_i(x) = 1/10 + s_i ||x - p_i||^2 with s_i chosen so that
    the range stays inside [1/10, 9/10] and every partial derivative is
    bounded by 1 in absolute value on the domain.
    """
    rng = np.random.default_rng([2718, N, n])
    components = []
    for i in range(N):
        p = rng.uniform(0.15, 0.85, size=n)
        w = np.maximum(p, 1.0 - p)  # max |x_j - p_j| over [0,1]
        M = float(np.sum(w**2))  # max ||x - p||^2 over the box
        s = min(0.8 / M, 1.0 / (2.0 * float(np.max(w))))

        def f(x, p=p, s=s):
            d = x - p
            return 0.1 + s * float(np.dot(d, d))

        def grad(x, p=p, s=s):
            return 2.0 * s * (x - p)

        components.append(
            ObjectiveFunction(
                name=f"avg-quadratics-{N}-{n}[{i}]",
                dimension=n,
                evaluator=f,
                domain=[(0.0, 1.0)] * n,
                known_min=(p.copy(), 0.1),
                analytic_gradient=grad,
            )
        )
    return AveragedObjective(components)


def _avg_quadratics_mean(N: int, n: int) -> ObjectiveFunction:
    avg = _avg_quadratics(N, n)
    # Closed-form minimiser: s_i-weighted mean of the shift points p_i,
    # recovered from each component's gradient (grad = 2 s (x - p)).
    s = []
    p = []
    for f in avg.components:
        p_i = f.known_min[0]
        s.append(float(f.analytic_gradient(p_i + 1.0)[0]) / 2.0)
        p.append(p_i)
    s = np.array(s)
    p = np.array(p)
    x_star = (s[:, None] * p).sum(axis=0) / s.sum()
    value = avg.mean(x_star)
    # Valid Lipschitz constant for the mean on the unit cube.
    K = 2.0 / avg.N * float(np.sum(s * np.array([np.linalg.norm(np.maximum(pi, 1 - pi)) for pi in p])))
    obj = avg.mean_objective(name=f"avg-quadratics-{N}-{n}")
    obj.lipschitz_K = K
    obj.known_min = (x_star, value)
    return obj


_FAMILY_RE = re.compile(
    r"^(?:(fig1)|sphere-(\d+)|rosenbrock-(\d+)|piecewise-linear-(\d+)|avg-quadratics-(\d+)-(\d+))$"
)


def corpus_lookup(name: str) -> ObjectiveFunction:
    """Return the named corpus entry, raising :class:`CorpusLookupError` if unknown."""
    m = _FAMILY_RE.match(name)
    if not m:
        raise CorpusLookupError(f"unknown corpus name {name!r}")
    fig1, sph, ros, pwl, avN, avn = m.groups()
    if fig1:
        return _fig1()
    if sph:
        return _sphere(int(sph))
    if ros:
        return _rosenbrock(int(ros))
    if pwl:
        return _piecewise_linear(int(pwl))
    return _avg_quadratics_mean(int(avN), int(avn))


def corpus_lookup_averaged(name: str) -> AveragedObjective:
    """Return the component form of an averaged corpus family."""
    m = re.match(r"^avg-quadratics-(\d+)-(\d+)$", name)
    if not m:
        raise CorpusLookupError(f"{name!r} is not an averaged corpus family")
    return _avg_quadratics(int(m.group(1)), int(m.group(2)))


DEFAULT_MANIFEST_NAMES = (
    "fig1",
    "sphere-1",
    "sphere-2",
    "sphere-3",
    "sphere-5",
    "rosenbrock-2",
    "rosenbrock-3",
    "piecewise-linear-1",
    "piecewise-linear-2",
    "piecewise-linear-3",
    "avg-quadratics-4-1",
    "avg-quadratics-4-2",
    "avg-quadratics-4-3",
)


def corpus_manifest(names=DEFAULT_MANIFEST_NAMES) -> list[dict]:
    """Machine-readable manifest of corpus entries (name, n, K, known minimum)."""
    rows = []
    for name in names:
        fn = corpus_lookup(name)
        rows.append(
            {
                "name": name,
                "n": fn.dimension,
                "K": fn.lipschitz_K,
                "domain": [list(b) for b in fn.domain],
                "known_min_point": None if fn.known_min is None else [float(v) for v in fn.known_min[0]],
                "known_min_value": None if fn.known_min is None else fn.known_min[1],
            }
        )
    return rows


def manifest_json(names=DEFAULT_MANIFEST_NAMES) -> str:
    return json.dumps(corpus_manifest(names), indent=2, sort_keys=True)
