"""Threshold equation, limit constants, and the 1/k convergence study.

The model: points uniform on the k-sphere are adjacent when their inner
product is at most -c/sqrt(k), with c > 0 solved so that a single
coordinate falls below the threshold with probability exactly p. As k
grows the scaled coordinate tends to a standard normal, so c converges to
-Phi^{-1}(p); the convergence study measures the O(1/k) gap empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import bounds
from .errors import DomainError
from .numerics import coord_cdf, find_root, normal_quantile, validate_probability

__all__ = [
    "ConvergenceStudy",
    "LimitConstants",
    "ModelParams",
    "a_of_c",
    "convergence_study",
    "limit_c",
    "limit_constants",
    "solve_threshold",
]


@dataclass(frozen=True)
class ModelParams:
    """Configuration of the sphere-graph model: dimension, density, threshold.

    ``threshold`` = -c/sqrt(k) is the inner-product cutoff; ``c`` solves
    coord_cdf(k, threshold) = p.
    """

    k: int
    p: float
    c: float

    @property
    def threshold(self) -> float:
        return -self.c / math.sqrt(self.k)


@dataclass(frozen=True)
class LimitConstants:
    """The k -> infinity constants of the analysis at the optimal density."""

    p_star: float
    delta_star: float
    c_star: float
    a_star: float


def _validate_model_p(p: float) -> float:
    validate_probability(p, "p")
    if not 0.0 < p < 0.5:
        raise DomainError(f"model density p must lie in (0, 1/2), got {p}")
    return p


def solve_threshold(k: int, p: float, tol: float = 1e-12) -> ModelParams:
    """Solve coord_cdf(k, -c/sqrt(k)) = p for the unique c > 0.

    Bracket: p < 1/2 forces the threshold into (-1, 0); the search runs
    over the full representable open interval. For k = 1 the coordinate
    density blows up at the endpoints, so quantiles of extremely small p
    can fall below float resolution next to -1; that case raises rather
    than returning a value violating the residual contract.
    """
    if k < 1:
        raise DomainError(f"sphere dimension k must be >= 1, got {k}")
    _validate_model_p(p)
    lo = math.nextafter(-1.0, 0.0)
    if coord_cdf(k, lo) > p:
        raise DomainError(
            f"p={p} is below the float resolution of the coordinate CDF at "
            f"k={k} (the quantile is indistinguishable from -1)"
        )
    f = lambda x: coord_cdf(k, x) - p
    s = find_root(f, lo, 0.0, tol=1e-13, ftol=tol)
    if s >= 0.0:
        # p within tol of 1/2: pin the root in s-space instead
        s = find_root(f, lo, 0.0, tol=1e-15, ftol=0.0)
    if s >= 0.0 or abs(f(s)) > tol:
        raise DomainError(
            f"quantile for k={k}, p={p} is not resolvable to the requested "
            f"tolerance {tol} in double precision"
        )
    c = -s * math.sqrt(k)
    return ModelParams(k=k, p=p, c=c)


def limit_c(p: float) -> float:
    """c(p) = -normal_quantile(p), the k -> infinity limit of the threshold constant."""
    _validate_model_p(p)
    return -normal_quantile(p)


def a_of_c(c: float) -> float:
    """The curvature constant (1/3) * (exp(-c^2) / (2 pi))**(3/2)."""
    if c < 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    return (math.exp(-c * c) / (2.0 * math.pi)) ** 1.5 / 3.0


@lru_cache(maxsize=1)
def limit_constants() -> LimitConstants:
    """p*, delta*, c*, a* assembled from the density optimizer and quantile."""
    p_star, delta_star = bounds.find_p_star()
    c_star = -normal_quantile(p_star)
    return LimitConstants(p_star=p_star, delta_star=delta_star, c_star=c_star, a_star=a_of_c(c_star))


@dataclass(frozen=True)
class ConvergenceStudy:
    """Residuals c^{k,p} - c(p) with a least-squares fit against 1/k."""

    p: float
    rows: tuple  # (k, c, residual) triples
    coefficient: float  # residual ~ coefficient / k
    max_abs_deviation: float
    max_rel_deviation: float


def convergence_study(p: float, k_list) -> ConvergenceStudy:
    """Tabulate threshold residuals and fit them against 1/k.

    The fit minimizes sum (residual_k - beta/k)^2; deviations are reported
    both absolutely and relative to the fitted beta/k.
    """
    _validate_model_p(p)
    climit = limit_c(p)
    rows = []
    for k in k_list:
        if k < 2:
            raise DomainError(f"convergence study requires k >= 2, got {k}")
        c = solve_threshold(int(k), p).c
        rows.append((int(k), c, c - climit))
    sxx = sum((1.0 / k) ** 2 for k, _, _ in rows)
    sxy = sum(r / k for k, _, r in rows)
    beta = sxy / sxx if sxx > 0 else 0.0
    max_abs = 0.0
    max_rel = 0.0
    for k, _, r in rows:
        fit = beta / k
        max_abs = max(max_abs, abs(r - fit))
        if fit != 0.0:
            max_rel = max(max_rel, abs(r - fit) / abs(fit))
    return ConvergenceStudy(
        p=p,
        rows=tuple(rows),
        coefficient=beta,
        max_abs_deviation=max_abs,
        max_rel_deviation=max_rel,
    )
