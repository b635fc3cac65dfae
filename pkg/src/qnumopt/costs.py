"""Analytic classical/quantum cost bodies and the summary cost report.

Every formula is the bound's body with unit constants; hidden polylogarithmic
factors are reported in a separate column (clamped below at 1) rather than
multiplied in.  Logarithms are base 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from qnumopt.bnb import bnb_polylog, classical_bnb_cost, quantum_bnb_cost
from qnumopt.minibatch import gradient_polylog

ALGORITHMS = ("bnb", "line-search", "nelder-mead", "gradient")

_REQUIRED = {
    "bnb": ("t_min", "d", "n", "tf", "eps", "classical_measured"),
    "line-search": ("k", "tau_d", "m_max", "tf", "classical_measured"),
    "nelder-mead": ("k", "s", "n", "tf", "classical_measured"),
    "gradient": ("n", "tf", "eps", "classical_measured"),
}


class SchemaError(ValueError):
    """A report row is missing a required stat field."""


def _log2k(k: float) -> float:
    return math.log2(max(2.0, k))


def line_search_costs(k: int, tau_d: float, m_max: int, tf: float) -> tuple[float, float]:
    """(classical, quantum): k(tau + m_max tf)  vs  k(tau + sqrt(m_max) log2(k) tf)."""
    classical = k * (tau_d + m_max * tf)
    quantum = k * (tau_d + math.sqrt(m_max) * _log2k(k) * tf)
    return float(classical), float(quantum)


def nelder_mead_costs(k: int, s: int, n: int, tf: float) -> tuple[float, float]:
    """(classical, quantum): ((s+1)n + k)tf  vs  ((s+1)sqrt(n) log2(k) + k)tf."""
    classical = ((s + 1) * n + k) * tf
    quantum = ((s + 1) * math.sqrt(n) * _log2k(k) + k) * tf
    return float(classical), float(quantum)


def gradient_costs(n: int, tf: float, eps: float) -> tuple[float, float]:
    """(classical, quantum): n tf eps^-2  vs  sqrt(n) tf eps^-1."""
    classical = n * tf * eps**-2
    quantum = math.sqrt(n) * tf / eps
    return float(classical), float(quantum)


def grover_direction_cost(n: int, k: int, tf: float) -> float:
    """sqrt(n) log2(k) tf: locating a usable coordinate direction by search."""
    if min(n, k) < 1 or tf <= 0:
        raise ValueError("parameters must be >= 1")
    return math.sqrt(n) * math.log2(max(2, k)) * tf


def classical_direction_cost(n: int, tf: float) -> float:
    return float(n * tf)


@dataclass
class CostReport:
    rows: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.rows, indent=2, sort_keys=True)

    def row(self, algorithm: str) -> dict:
        for r in self.rows:
            if r["algorithm"] == algorithm:
                return r
        raise KeyError(algorithm)


def _require(algorithm: str, stats: dict) -> None:
    for field_name in _REQUIRED[algorithm]:
        if field_name not in stats or stats[field_name] is None:
            raise SchemaError(f"{algorithm}: missing field {field_name!r}")


def table1_report(measurements: dict) -> CostReport:
    """Assemble one cost row per algorithm from measured run statistics.

    ``measurements`` maps an algorithm name ("bnb", "line-search",
    "nelder-mead", "gradient") to its stat fields; unknown algorithms are
    rejected and missing fields raise :class:`SchemaError` naming the field.
    Emulated quantum query counts pass through when present.
    """
    if not measurements:
        raise SchemaError("no measurements supplied")
    report = CostReport()
    for algorithm, stats in measurements.items():
        if algorithm not in _REQUIRED:
            raise SchemaError(f"unknown algorithm {algorithm!r}")
        _require(algorithm, stats)
        if algorithm == "bnb":
            classical = classical_bnb_cost(stats["t_min"], stats["n"], stats["tf"])
            quantum = quantum_bnb_cost(stats["t_min"], max(1, stats["d"]), stats["n"], stats["tf"])
            polylog = bnb_polylog(max(1, stats["d"]), stats["eps"])
        elif algorithm == "line-search":
            classical, quantum = line_search_costs(
                stats["k"], stats["tau_d"], stats["m_max"], stats["tf"]
            )
            polylog = 1.0
        elif algorithm == "nelder-mead":
            classical, quantum = nelder_mead_costs(stats["k"], stats["s"], stats["n"], stats["tf"])
            polylog = 1.0
        else:
            classical, quantum = gradient_costs(stats["n"], stats["tf"], stats["eps"])
            polylog = gradient_polylog(stats["n"], stats["eps"])
        report.rows.append(
            {
                "algorithm": algorithm,
                "classical_measured": stats["classical_measured"],
                "classical_model": classical,
                "quantum_model": quantum,
                "quantum_polylog": polylog,
                "quantum_emulated": stats.get("quantum_emulated"),
            }
        )
    return report
