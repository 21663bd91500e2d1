"""Closed-form exponents: the per-color coefficient, its optimum, and bound tables.

All exponents are base-2 logarithms ("bits"): every bound in the pipeline
is a power of two, and the known value of the optimal per-color coefficient
(~0.3838) is reproduced only in base 2 (at p = 1/2 the formula collapses
to exactly 3/8, the classic exponent). The per-color formula appears twice
on purpose: once as delta(p) and once inside the t^2 bound, and a test
pins the two encodings against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .numerics import maximize_scalar, validate_probability

__all__ = [
    "ExponentReport",
    "baseline_coefficients",
    "compare_baselines",
    "ctt_log2_bound",
    "delta",
    "exponent_report",
    "find_p_star",
    "sawin_chain_log2",
]


def delta(p: float, base: str = "two") -> float:
    """Per-color exponent coefficient -((4 log(1-p) - log p) log p) / (8 log(1-p)).

    ``base`` selects the logarithm base; the net effect of switching is a
    single log factor (two in the numerator over one in the denominator).
    """
    validate_probability(p, "p", open_interval=True)
    if base == "two":
        lp = math.log2(p)
        lq = math.log2(1.0 - p)
    elif base == "natural":
        lp = math.log(p)
        lq = math.log1p(-p)
    else:
        raise DomainError(f"base must be 'two' or 'natural', got {base!r}")
    return -((4.0 * lq - lp) * lp) / (8.0 * lq)


def find_p_star(lo: float = 0.05, hi: float = 0.95) -> tuple[float, float]:
    """(p*, delta*) maximizing the per-color coefficient over [lo, hi]."""
    return maximize_scalar(delta, lo, hi, tol=1e-11)


def ctt_log2_bound(t: int, p: float, slack: float = 0.0) -> float:
    """log2 upper bound on c_{t,t} from the binomial-random-graph argument.

    t^2 (4 log(1-p) - log p) log p / (8 log(1-p)) + t log2(t) + slack * t;
    the O(t) term's coefficient is configuration (default 0) because the
    source bound is asymptotic.
    """
    if t < 3:
        raise DomainError(f"need t >= 3, got {t}")
    validate_probability(p, "p", open_interval=True)
    lp = math.log2(p)
    lq = math.log2(1.0 - p)
    leading = t * t * (4.0 * lq - lp) * lp / (8.0 * lq)
    return leading + t * math.log2(t) + slack * t


def sawin_chain_log2(t: int, ell: int, ctt_log2: float) -> float:
    """log2 lower bound on r(t; ell) from a c_{t,t} bound:
    -(ell-2)/t * ctt_log2 + (t-1)/2."""
    if t < 3 or ell < 3:
        raise DomainError(f"need t, ell >= 3, got t={t}, ell={ell}")
    return -(ell - 2) / t * ctt_log2 + (t - 1) / 2.0


@dataclass(frozen=True)
class ExponentReport:
    """Per-density exponent summary for a given (t, ell)."""

    p: float
    delta_p: float  # bits
    per_color_coefficient: float  # bits per (ell-2) t
    total_log2_bound: float  # bits


def exponent_report(p: float, t: int, ell: int, slack: float = 0.0) -> ExponentReport:
    d = delta(p)
    total = sawin_chain_log2(t, ell, ctt_log2_bound(t, p, slack))
    return ExponentReport(p=p, delta_p=d, per_color_coefficient=d, total_log2_bound=total)


def baseline_coefficients(ell: int, delta_star: float | None = None, epsilon: float = 0.0) -> dict:
    """Coefficients of t in log2 of each lower bound for a given color count.

    random coloring: log2(ell)/2; Abbott's product construction:
    floor(ell/2)/2; Sawin's binomial-random-graph bound: delta*(ell-2) + 1/2;
    the sphere-graph bound: (delta*+epsilon)(ell-2) + 1/2. ``delta_star``
    defaults to the optimized per-color coefficient.
    """
    if ell < 3:
        raise DomainError(f"need ell >= 3, got {ell}")
    if delta_star is None:
        delta_star = find_p_star()[1]
    return {
        "ell": ell,
        "random": math.log2(ell) / 2.0,
        "abbott": (ell // 2) / 2.0,
        "sawin": delta_star * (ell - 2) + 0.5,
        "sphere": (delta_star + epsilon) * (ell - 2) + 0.5,
    }


def compare_baselines(
    ell_max: int, delta_star: float | None = None, epsilon: float = 0.0
) -> list[dict]:
    """Baseline table for ell = 3..ell_max."""
    if ell_max < 3:
        raise DomainError(f"need ell_max >= 3, got {ell_max}")
    if delta_star is None:
        delta_star = find_p_star()[1]
    return [baseline_coefficients(ell, delta_star, epsilon) for ell in range(3, ell_max + 1)]
