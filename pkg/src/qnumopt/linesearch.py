"""Backtracking line search with pluggable descent directions.

The step size at each iterate is gamma^m0 where m0 is the smallest
backtracking exponent satisfying the Armijo sufficient-decrease condition
f(x + eta*d) <= f(x) + beta*eta*D_d f(x).  The classical search scans
m = 0, 1, 2, ...; the quantum mode locates m0 with the first-marked-element
emulator, amplified by a first-agreement vote.

Points along the search may leave the objective's box; evaluation uses the
function's natural extension (no domain check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from qnumopt.emulators import EmulatorConfig, QueryTally, lin_lin_first_hit_emulated
from qnumopt.objective import CountingOracle, Point


class LineSearchCapError(RuntimeError):
    """No backtracking exponent under m_cap satisfied the Armijo condition."""

    def __init__(self, m_cap):
        super().__init__(f"Armijo condition not met for any m <= {m_cap}")
        self.m_cap = m_cap


@dataclass
class LineSearchConfig:
    gamma: float = 0.5  # backtracking ratio
    beta: float = 0.5  # Armijo slope fraction
    m_cap: int = 64  # gamma^64 underflows meaningfully past double precision
    k_max: int = 100
    grad_tolerance: float = 1e-6
    fd_step: float = 1e-6  # central-difference step for providers

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie strictly inside (0, 1)")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie strictly inside (0, 1)")


def _gradient(oracle: CountingOracle, x: Point, h: float) -> tuple[Point, int]:
    """Gradient at x: analytic when available (free), else central differences
    through the oracle's natural extension (2n queries)."""
    fn = oracle.fn
    if fn.analytic_gradient is not None:
        return np.asarray(fn.analytic_gradient(x), dtype=float), 0
    n = fn.dimension
    g = np.empty(n)
    for i in range(n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (oracle.evaluate(xp, check_domain=False) - oracle.evaluate(xm, check_domain=False)) / (2 * h)
    return g, 2 * n


class DirectionProvider:
    """Produces unit-norm descent directions; returns None at a stationary point."""

    kind = "base"

    def __init__(self):
        self.grad_queries = 0

    def tau_model(self, n: int) -> float:
        """Abstract direction-computation cost for the cost models."""
        return float(n)

    def propose(self, oracle: CountingOracle, x: Point, config: LineSearchConfig):
        """Return (d, Ddf, grad) with Ddf < 0, or None to signal termination."""
        raise NotImplementedError


class SteepestDescentProvider(DirectionProvider):
    kind = "steepest-descent"

    def propose(self, oracle, x, config):
        g, q = _gradient(oracle, x, config.fd_step)
        self.grad_queries += q
        norm = float(np.linalg.norm(g))
        if norm <= config.grad_tolerance:
            return None
        d = -g / norm
        return d, float(np.dot(d, g)), g


class CoordinateProvider(DirectionProvider):
    """Moves along the first coordinate whose partial derivative is resolvable."""

    kind = "coordinate"

    def propose(self, oracle, x, config):
        g, q = _gradient(oracle, x, config.fd_step)
        self.grad_queries += q
        for i in range(len(g)):
            if abs(g[i]) > config.grad_tolerance:
                d = np.zeros_like(g)
                d[i] = -np.sign(g[i])
                return d, -abs(float(g[i])), g
        return None


class NewtonProvider(DirectionProvider):
    """Newton direction from a user-supplied Hessian callback; falls back to
    steepest descent when the Newton direction is not a descent direction."""

    kind = "newton"

    def __init__(self, hessian):
        super().__init__()
        self.hessian = hessian

    def tau_model(self, n):
        return float(n * n)

    def propose(self, oracle, x, config):
        g, q = _gradient(oracle, x, config.fd_step)
        self.grad_queries += q
        if float(np.linalg.norm(g)) <= config.grad_tolerance:
            return None
        try:
            d = -np.linalg.solve(np.asarray(self.hessian(x), dtype=float), g)
        except np.linalg.LinAlgError:
            d = -g
        norm = float(np.linalg.norm(d))
        d = d / norm
        Ddf = float(np.dot(d, g))
        if Ddf >= 0:
            d = -g / float(np.linalg.norm(g))
            Ddf = float(np.dot(d, g))
        return d, Ddf, g


class BFGSProvider(DirectionProvider):
    """Rank-two curvature approximation B of the Hessian, identity-initialised.

    Updates skip when the observed curvature s.y is not positive; B stays
    symmetric by construction (re-symmetrised against float drift).
    """

    kind = "bfgs"

    def __init__(self):
        super().__init__()
        self.B: Optional[np.ndarray] = None
        self._prev: Optional[tuple[Point, Point]] = None

    def tau_model(self, n):
        return float(n * n)

    def propose(self, oracle, x, config):
        g, q = _gradient(oracle, x, config.fd_step)
        self.grad_queries += q
        n = len(g)
        if self.B is None:
            self.B = np.eye(n)
        if self._prev is not None:
            x_prev, g_prev = self._prev
            s = x - x_prev
            y = g - g_prev
            sy = float(np.dot(s, y))
            if sy > 1e-12:
                Bs = self.B @ s
                self.B = self.B + np.outer(y, y) / sy - np.outer(Bs, Bs) / float(np.dot(s, Bs))
                self.B = 0.5 * (self.B + self.B.T)
        self._prev = (x.copy(), g.copy())
        if float(np.linalg.norm(g)) <= config.grad_tolerance:
            return None
        try:
            d = -np.linalg.solve(self.B, g)
        except np.linalg.LinAlgError:
            d = -g
        d = d / float(np.linalg.norm(d))
        Ddf = float(np.dot(d, g))
        if Ddf >= 0:
            d = -g / float(np.linalg.norm(g))
            Ddf = float(np.dot(d, g))
        return d, Ddf, g


def make_provider(kind: str, hessian=None) -> DirectionProvider:
    if kind == "steepest-descent":
        return SteepestDescentProvider()
    if kind == "coordinate":
        return CoordinateProvider()
    if kind == "bfgs":
        return BFGSProvider()
    if kind == "newton":
        if hessian is None:
            raise ValueError("newton provider requires a hessian callback")
        return NewtonProvider(hessian)
    raise ValueError(f"unknown direction provider {kind!r}")


def armijo_holds(
    oracle: CountingOracle,
    x: Point,
    d: Point,
    eta: float,
    beta: float,
    Ddf: float,
    fx: Optional[float] = None,
) -> bool:
    """f(x + eta d) <= f(x) + beta * eta * Ddf; one query when fx is cached."""
    if Ddf >= 0:
        raise ValueError("Ddf must be negative (descent direction)")
    if fx is None:
        fx = oracle.evaluate(x, check_domain=False)
    trial = oracle.evaluate(x + eta * np.asarray(d), check_domain=False)
    return trial <= fx + beta * eta * Ddf


def _armijo_scan(oracle, x, d, gamma, beta, Ddf, m_cap, fx) -> tuple[int, float]:
    d = np.asarray(d, dtype=float)
    for m in range(m_cap + 1):
        eta = gamma**m
        trial = oracle.evaluate(x + eta * d, check_domain=False)
        if trial <= fx + beta * eta * Ddf:
            return m, trial
    raise LineSearchCapError(m_cap)


def armijo_m0(
    oracle: CountingOracle,
    x: Point,
    d: Point,
    gamma: float,
    beta: float,
    Ddf: float,
    m_cap: int = 64,
    fx: Optional[float] = None,
) -> int:
    """Smallest m with the Armijo condition holding at eta = gamma^m.

    Linear scan over m = 0, 1, 2, ... consuming m0 + 1 queries.
    """
    if Ddf >= 0:
        raise ValueError("Ddf must be negative (descent direction)")
    if not (0 < gamma < 1 and 0 < beta < 1):
        raise ValueError("gamma and beta must lie in (0, 1)")
    if fx is None:
        fx = oracle.evaluate(x, check_domain=False)
    m0, _ = _armijo_scan(oracle, x, d, gamma, beta, Ddf, m_cap, fx)
    return m0


def _lean_profile(config: EmulatorConfig) -> EmulatorConfig:
    # One pass per vote repetition; the vote supplies the amplification.
    return replace(
        config,
        linlin_passes=1,
        linlin_inner_eps=0.5,
        linlin_inner_budget=0.9,
        linlin_prefix_budget=0.3,
        linlin_verify=2.0,
    )


def quantum_m0(
    oracle: CountingOracle,
    x: Point,
    d: Point,
    gamma: float,
    beta: float,
    Ddf: float,
    emulator: EmulatorConfig,
    rng: np.random.Generator,
    k: int,
    m_cap: int = 64,
    fx: Optional[float] = None,
) -> tuple[int, QueryTally]:
    """Locate m0 with the first-marked-element emulator.

    Up to ceil(log2 k) single-pass emulated searches run until two agree
    (first-agreement vote); disagreement falls back to the classical scan of
    the already-materialised predicate.  Matches the classical m0 with
    probability >= 1 - 1/k; the tally holds the charged emulated queries.
    """
    if Ddf >= 0:
        raise ValueError("Ddf must be negative (descent direction)")
    d = np.asarray(d, dtype=float)
    if fx is None:
        fx = oracle.fn.raw(x)
    etas = gamma ** np.arange(m_cap + 1, dtype=float)
    trials = np.array([oracle.fn.raw(x + eta * d) for eta in etas])
    marked = trials <= fx + beta * etas * Ddf
    tally = QueryTally(classical_side_queries=m_cap + 1)

    lean = _lean_profile(emulator)
    N = m_cap + 1
    repeats = max(2, math.ceil(math.log2(max(k, 2))))
    seen: dict[int, int] = {}
    result: Optional[int] = None
    for _ in range(repeats):
        m_r, t_r = lin_lin_first_hit_emulated(marked, N, lean, rng)
        tally.add(t_r)
        if m_r is not None:
            seen[m_r] = seen.get(m_r, 0) + 1
            if seen[m_r] == 2:
                result = m_r
                break
    if result is None:  # no agreement: classical fallback on the known instance
        hits = np.flatnonzero(marked)
        if len(hits) == 0:
            raise LineSearchCapError(m_cap)
        result = int(hits[0])
    if not marked[result]:
        raise LineSearchCapError(m_cap)
    return result, tally


def gould_interval(L: float, Ddf: float, beta: float, d_norm: float) -> float:
    """Upper end of the step interval (0, 2(beta-1)Ddf / (L ||d||^2)] whose every
    point satisfies the Armijo condition when grad f is L-Lipschitz at x."""
    if L <= 0:
        raise ValueError("L must be positive")
    if Ddf >= 0:
        raise ValueError("Ddf must be negative")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    return 2.0 * (beta - 1.0) * Ddf / (L * d_norm**2)


@dataclass
class IterationTrace:
    records: list[dict] = field(default_factory=list)
    k: int = 0
    m_max: int = 0
    status: str = ""
    queries_classical: int = 0
    queries_quantum_emulated: int = 0

    def add(self, **row):
        self.records.append(row)
        self.k = len(self.records)
        self.m_max = max(self.m_max, row["m0"])

    def json_rows(self) -> list[dict]:
        return [
            {
                "iter": i,
                "m0": r["m0"],
                "eta": r["eta"],
                "f": r["f"],
                "queries_classical": r["queries_classical"],
                "queries_quantum": r["queries_quantum"],
            }
            for i, r in enumerate(self.records)
        ]


def backtracking_descent(
    oracle: CountingOracle,
    x0: Point,
    provider: DirectionProvider,
    config: LineSearchConfig,
    quantum: bool = False,
    emulator: Optional[EmulatorConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[Point, IterationTrace]:
    """Iterate direction choice plus backtracking until the gradient norm falls
    under the tolerance or k_max iterations pass."""
    x = np.asarray(x0, dtype=float).copy()
    trace = IterationTrace()
    if quantum:
        emulator = emulator or EmulatorConfig()
        rng = rng or np.random.default_rng(emulator.seed)
        fx = oracle.fn.raw(x)
    else:
        fx = oracle.evaluate(x, check_domain=False)
        trace.queries_classical += 1

    for _ in range(config.k_max):
        before = oracle.eval_count
        proposal = provider.propose(oracle, x, config)
        if proposal is None:
            trace.status = "gradient-tolerance"
            break
        d, Ddf, _ = proposal
        if quantum:
            m0, tally = quantum_m0(
                oracle, x, d, config.gamma, config.beta, Ddf, emulator, rng, config.k_max, config.m_cap, fx
            )
            eta = config.gamma**m0
            f_new = oracle.fn.raw(x + eta * d)
            trace.queries_quantum_emulated += tally.oracle_queries
            q_emu = tally.oracle_queries
        else:
            m0, f_new = _armijo_scan(oracle, x, d, config.gamma, config.beta, Ddf, config.m_cap, fx)
            eta = config.gamma**m0
            q_emu = 0
        x = x + eta * d
        q_cls = oracle.eval_count - before
        trace.queries_classical += q_cls
        trace.add(
            x=x.copy(), d=d, Ddf=Ddf, m0=m0, eta=eta, f=f_new,
            queries_classical=q_cls, queries_quantum=q_emu,
        )
        fx = f_new
    else:
        trace.status = "k_max"
    return x, trace
