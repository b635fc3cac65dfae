"""Numerical optimisers under a query-counting oracle, plus quantum query-cost models.

Classical algorithms (Lipschitz branch-and-bound, DIRECT, backtracking line
search, Nelder-Mead, mini-batch gradient descent) run against a
:class:`~qnumopt.objective.CountingOracle` that counts every function
evaluation.  Alongside each algorithm the package provides analytic quantum
cost formulas and query-level statistical emulators of the quantum
subroutines (minimum finding, first-marked-element search) so that claimed
speedups can be quantified without simulating quantum states.
"""

from qnumopt.objective import (
    AveragedObjective,
    CountingOracle,
    DomainError,
    ObjectiveFunction,
    finite_diff_gradient,
)
from qnumopt.corpus import corpus_lookup, corpus_manifest

__version__ = "0.1.0"

__all__ = [
    "AveragedObjective",
    "CountingOracle",
    "DomainError",
    "ObjectiveFunction",
    "corpus_lookup",
    "corpus_manifest",
    "finite_diff_gradient",
]
