"""The full improvement analysis: from the base-graph size M to the certified epsilon.

Pipeline, in dependency order:

1. ``choose_M_log2``     - the base-graph size M = (p* - a_k/(D p*^2) + C/D^2)^{-t/2}
2. ``clique_side_log2``  - union bound on the probability the graph has a t-clique
3. ``independence_numerator_log2`` - the Stirling-sum bound on the numerator
4. ``optimal_r``         - the maximizer of the quadratic-in-r exponent
5. ``exponent_expression`` - the resulting t^2 coefficient
6. ``f_of_x``            - the coefficient as a function of x = 1/D
7. ``f_prime_zero_closed`` / ``f_prime_zero_fd`` - its derivative at 0, two ways
8. ``find_gamma_epsilon``  - grid-certified gamma with f(x) >= f(0) + 0.5 a x,
   yielding D = max(D0, 1/gamma) and epsilon = 0.5 a / D

Log bases: the final exponent chain lives in base 2 (f(0) then equals the
optimal per-color coefficient), while the headline derivative magnitude
f'(0) ~ 0.565 a arises with natural logs; both bases are supported
everywhere and tests pin both. The unknown constants D0 and C are
configuration, never guessed; every epsilon is parametric in them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import DomainError, InadmissibleParameters
from .numerics import LN2, Log2, log2_binomial, log2_factorial, log2_sum, stirling2_log2_row

__all__ = [
    "BoundParams",
    "GammaCertificate",
    "PQPair",
    "analysis_report",
    "bound_params",
    "choose_M_log2",
    "clique_side_log2",
    "eq9_exponent_log2",
    "exponent_expression",
    "f_of_x",
    "f_prime_zero_closed",
    "f_prime_zero_fd",
    "find_gamma_epsilon",
    "independence_numerator_log2",
    "optimal_r",
    "pq_pair",
]


@dataclass(frozen=True)
class BoundParams:
    """Knobs of the improvement analysis.

    ``C`` and ``D0`` are inherited constants with no published numeric
    value; they are configuration with defaults C=1, D0=10. ``a_k`` is the
    curvature constant at the working dimension k = (D t)^2 and defaults to
    its limit value ``a``; ``eta`` controls the a^- = (1-eta) a,
    a^+ = (1+eta) a split.
    """

    t: int
    D: float
    C: float
    eta: float = 0.0
    D0: float = 10.0
    a_k: float = 0.0
    a: float = 0.0
    p: float = 0.0

    @property
    def k(self) -> float:
        return (self.D * self.t) ** 2

    @property
    def a_minus(self) -> float:
        return (1.0 - self.eta) * self.a

    @property
    def a_plus(self) -> float:
        return (1.0 + self.eta) * self.a


def bound_params(
    t: int,
    D: float,
    C: float,
    eta: float = 0.0,
    D0: float = 10.0,
    a_k: float | None = None,
) -> BoundParams:
    """Validated BoundParams with a_k defaulting to the limit constant a*."""
    if t < 3:
        raise DomainError(f"need t >= 3, got {t}")
    if D <= 0 or C <= 0 or D0 <= 0:
        raise DomainError(f"D, C, D0 must be positive, got D={D}, C={C}, D0={D0}")
    if not 0.0 <= eta < 1.0:
        raise DomainError(f"eta must lie in [0, 1), got {eta}")
    consts = model.limit_constants()
    a = consts.a_star
    if a_k is None:
        a_k = a
    if a_k <= 0:
        raise DomainError(f"a_k must be positive, got {a_k}")
    return BoundParams(t=t, D=float(D), C=float(C), eta=float(eta), D0=float(D0),
                       a_k=float(a_k), a=a, p=consts.p_star)


def _log(base: str):
    if base == "two":
        return math.log2
    if base == "natural":
        return math.log
    raise DomainError(f"base must be 'two' or 'natural', got {base!r}")


@dataclass(frozen=True)
class PQPair:
    """The clique-side base P(x) and independence-side base Q(x) at one x."""

    x: float
    P: float
    Q: float


def pq_pair(x: float, C: float, a: float, p: float | None = None) -> PQPair:
    """P = p* - (a/p*^2) x + C x^2 and Q = 1 - p* + (a/(1-p*)^2) x + C x^2."""
    if p is None:
        p = model.limit_constants().p_star
    P = p - (a / (p * p)) * x + C * x * x
    Q = 1.0 - p + (a / ((1.0 - p) * (1.0 - p))) * x + C * x * x
    if not (0.0 < P < 1.0 and 0.0 < Q < 1.0):
        raise InadmissibleParameters(
            f"inadmissible x={x}: P={P}, Q={Q} must lie in (0, 1)"
        )
    return PQPair(x=x, P=P, Q=Q)


def choose_M_log2(params: BoundParams) -> float:
    """log2 of the base-graph size M = (p* - a_k/(D p*^2) + C/D^2)^{-t/2}."""
    p = params.p
    base = p - params.a_k / (params.D * p * p) + params.C / params.D**2
    if not 0.0 < base < 1.0:
        raise InadmissibleParameters(f"inadmissible parameters: M base {base} not in (0, 1)")
    return -(params.t / 2.0) * math.log2(base)


def clique_side_log2(params: BoundParams) -> float:
    """log2 of the union bound on the probability that the graph contains a t-clique.

    C(M, t) * (1 + 2^-t) * (p* - a_k/(D p*^2) + C/D^2 + 2 a_k/(D p*^2 t))^C(t,2),
    assembled entirely in log space since M is astronomically large.
    """
    p = params.p
    t = params.t
    l2M = choose_M_log2(params)
    base = (
        p
        - params.a_k / (params.D * p * p)
        + params.C / params.D**2
        + 2.0 * params.a_k / (params.D * p * p * t)
    )
    if not 0.0 < base < 1.0:
        raise InadmissibleParameters(f"inadmissible parameters: clique base {base} not in (0, 1)")
    return (
        log2_binomial(Log2.from_log2(l2M), t)
        + math.log2(1.0 + 2.0**-t)
        + (t * (t - 1) // 2) * math.log2(base)
    )


def _independence_base(params: BoundParams, r: int) -> float:
    p = params.p
    sqrt_k = params.D * params.t
    base = (
        1.0
        - p
        + params.a_k * (r - 2) / ((1.0 - p) ** 2 * sqrt_k)
        + params.C / params.D**2
    )
    if not 0.0 < base < 1.0:
        raise InadmissibleParameters(
            f"inadmissible parameters: independence base {base} not in (0, 1) at r={r}"
        )
    return base


def independence_numerator_log2(params: BoundParams) -> float:
    """log2 of the Stirling-sum bound on P(the t sampled vertices are independent).

    sum_{r=1}^{t} C(M,r) {t over r} r! / M^t * (1 + 2^-t)
                  * (1 - p* + a_k (r-2)/((1-p*)^2 sqrt(k)) + C/D^2)^C(r,2),
    evaluated by log-sum-exp over r. Stirling numbers come from the
    log-space DP, capped at t <= 200.
    """
    t = params.t
    if t > 200:
        raise DomainError(f"independence numerator supports t <= 200, got {t}")
    l2M = choose_M_log2(params)
    srow = stirling2_log2_row(t)
    log_m = Log2.from_log2(l2M)
    terms = np.empty(t)
    for r in range(1, t + 1):
        base = _independence_base(params, r)
        terms[r - 1] = (
            log2_binomial(log_m, r)
            + srow[r]
            + log2_factorial(r)
            - t * l2M
            + math.log2(1.0 + 2.0**-t)
            + (r * (r - 1) // 2) * math.log2(base)
        )
    return log2_sum(terms)


def eq9_exponent_log2(params: BoundParams, r: float) -> float:
    """The quadratic-in-r exponent whose max dominates the Stirling sum:
    (r(r-1)/2) log2(Q) + ((t-r)t/2) log2(P)."""
    pq = pq_pair(1.0 / params.D, params.C, params.a_k, params.p)
    t = params.t
    return (r * (r - 1) / 2.0) * math.log2(pq.Q) + ((t - r) * t / 2.0) * math.log2(pq.P)


def optimal_r(params: BoundParams) -> float:
    """Closed-form maximizer of the quadratic exponent:
    1/2 + t log(P) / (2 log(Q)) (base-independent ratio)."""
    pq = pq_pair(1.0 / params.D, params.C, params.a_k, params.p)
    return 0.5 + params.t * math.log2(pq.P) / (2.0 * math.log2(pq.Q))


def exponent_expression(params: BoundParams, variant: str = "a_k") -> float:
    """The t^2 coefficient of the optimized exponent, in bits.

    ``variant="a_k"`` uses a_k everywhere; ``variant="a_plus_minus"`` uses
    the a^-/a^+ split (the weaker, i.e. larger, coefficient for eta > 0).
    The O(t) term is excluded.
    """
    x = 1.0 / params.D
    if variant == "a_k":
        pq = pq_pair(x, params.C, params.a_k, params.p)
        lP = math.log2(pq.P)
        lQ = math.log2(pq.Q)
        return lP * (4.0 * lQ - lP) / (8.0 * lQ)
    if variant == "a_plus_minus":
        lo = pq_pair(x, params.C, params.a_minus, params.p)
        hi = pq_pair(x, params.C, params.a_plus, params.p)
        lPm = math.log2(lo.P)
        lQm = math.log2(lo.Q)
        lPp = math.log2(hi.P)
        lQp = math.log2(hi.Q)
        return lPm * (4.0 * lQp - lPp) / (8.0 * lQm)
    raise DomainError(f"variant must be 'a_k' or 'a_plus_minus', got {variant!r}")


def f_of_x(
    x: float,
    C: float,
    a_minus: float,
    a_plus: float,
    base: str = "two",
    p: float | None = None,
) -> float:
    """f(x) = -log(P^-) (4 log(Q^+) - log(P^+)) / (8 log(Q^-)).

    P/Q superscripts mark which of a^-, a^+ enters; at a^- = a^+ this is
    the sign-flipped t^2 coefficient with x in place of 1/D. f(0) equals
    the optimal per-color coefficient in base two.
    """
    log = _log(base)
    lo = pq_pair(x, C, a_minus, p)
    hi = pq_pair(x, C, a_plus, p)
    return -(log(lo.P) * (4.0 * log(hi.Q) - log(hi.P))) / (8.0 * log(lo.Q))


def f_prime_zero_closed(p: float, a: float, eta: float = 0.0, base: str = "natural") -> float:
    """Closed-form f'(0) = a/(2p^3) - a log(p)/(4 p^3 log(1-p))
    - a log(p)^2 / (8 (1-p)^3 log(1-p)^2).

    Stated in natural logs; the base-two derivative is the same expression
    divided by ln 2. The eta-dependent correction involves an unspecified
    function h(p, a), so eta must be 0 here.
    """
    if eta != 0.0:
        raise DomainError(
            "f_prime_zero_closed requires eta=0: the eta * h(p, a) correction "
            "has no specified form for h"
        )
    if not 0.0 < p < 0.5:
        raise DomainError(f"need p in (0, 1/2), got {p}")
    lp = math.log(p)
    lq = math.log1p(-p)
    val = (
        a / (2.0 * p**3)
        - a * lp / (4.0 * p**3 * lq)
        - a * lp * lp / (8.0 * (1.0 - p) ** 3 * lq * lq)
    )
    if base == "natural":
        return val
    if base == "two":
        return val / LN2
    raise DomainError(f"base must be 'two' or 'natural', got {base!r}")


def f_prime_zero_fd(
    C: float, a: float, base: str = "natural", p: float | None = None
) -> tuple[float, float]:
    """One-sided finite-difference f'(0) with Richardson extrapolation.

    Steps 1e-5, 1e-6, 1e-7; returns (value, error estimate from comparing
    the two extrapolation pairs). Independent check of the closed form;
    the C x^2 term has zero slope at 0, so the result must not depend on C.
    """
    f0 = f_of_x(0.0, C, a, a, base, p)
    d = {}
    for h in (1e-5, 1e-6, 1e-7):
        d[h] = (f_of_x(h, C, a, a, base, p) - f0) / h
    r1 = (10.0 * d[1e-6] - d[1e-5]) / 9.0
    r2 = (10.0 * d[1e-7] - d[1e-6]) / 9.0
    return r2, abs(r2 - r1)


@dataclass(frozen=True)
class GammaCertificate:
    """Grid-certified gamma for f(x) >= f(0) + 0.5 a x, and the resulting epsilon."""

    gamma: float
    D: float
    epsilon: float
    min_margin: float
    f0: float
    grid_size: int
    base: str


def find_gamma_epsilon(
    params: BoundParams,
    D0: float | None = None,
    base: str = "two",
    grid_size: int = 1200,
    span: float = 1e6,
) -> GammaCertificate:
    """Largest grid gamma <= 1/D0 with f(x) >= f(0) + 0.5 a x on all grid x <= gamma.

    The grid is geometric with ``grid_size`` points spanning a factor of
    ``span`` below 1/D0. Sets D1 = 1/gamma, D = max(D0, D1), and
    epsilon = 0.5 a / D. The appeal to the derivative's definition only
    gives existence; this is the concrete certificate, with the minimal
    margin over the certified range reported.
    """
    if grid_size < 1000:
        raise DomainError(f"grid must have >= 1000 points, got {grid_size}")
    d0 = params.D0 if D0 is None else float(D0)
    if d0 <= 0:
        raise DomainError(f"D0 must be positive, got {d0}")
    a = params.a
    x_hi = 1.0 / d0
    ratio = span ** (1.0 / (grid_size - 1))
    xs = x_hi / ratio ** np.arange(grid_size)  # descending
    f0 = f_of_x(0.0, params.C, params.a_minus, params.a_plus, base, params.p)
    margins = np.array(
        [
            f_of_x(float(x), params.C, params.a_minus, params.a_plus, base, params.p)
            - f0
            - 0.5 * a * float(x)
            for x in xs
        ]
    )
    ok = margins >= 0.0
    # largest grid point such that every grid point at or below it passes
    suffix_ok = np.logical_and.accumulate(ok[::-1])[::-1]
    if not suffix_ok.any():
        raise InadmissibleParameters(
            "no admissible gamma: the margin is negative even at the smallest grid point"
        )
    idx = int(np.argmax(suffix_ok))
    gamma = float(xs[idx])
    min_margin = float(margins[idx:].min())
    d_final = max(d0, 1.0 / gamma)
    return GammaCertificate(
        gamma=gamma,
        D=d_final,
        epsilon=0.5 * a / d_final,
        min_margin=min_margin,
        f0=f0,
        grid_size=grid_size,
        base=base,
    )


def analysis_report(
    t: int,
    D: float,
    C: float,
    eta: float = 0.0,
    D0: float = 10.0,
    base: str = "two",
    ell_max: int = 12,
    fprime_mode: str = "auto",
) -> dict:
    """Full improvement-analysis report (fixed JSON field names).

    ``fprime_mode``: "auto" computes the f'(0) fields when defined (eta=0)
    and nulls them otherwise; "closed" or "fd" demand that path and raise
    for eta != 0, where the derivative formulas do not apply.
    """
    if fprime_mode not in ("auto", "closed", "fd"):
        raise DomainError(f"fprime_mode must be auto, closed, or fd, got {fprime_mode!r}")
    params = bound_params(t=t, D=D, C=C, eta=eta, D0=D0)
    consts = model.limit_constants()
    cert = find_gamma_epsilon(params, base=base)
    fprime_closed = None
    fd_value = None
    if eta == 0.0:
        if fprime_mode in ("auto", "closed"):
            fprime_closed = f_prime_zero_closed(consts.p_star, params.a, 0.0, base)
        if fprime_mode in ("auto", "fd"):
            fd_value, _fd_err = f_prime_zero_fd(C, params.a, base)
    elif fprime_mode == "closed":
        # delegate so the error names the unspecified h term
        f_prime_zero_closed(consts.p_star, params.a, eta, base)
    elif fprime_mode == "fd":
        raise DomainError(
            "finite-difference f'(0) is defined at eta=0 only (the eta * h(p, a) "
            "correction has no specified form for h)"
        )
    variant = "a_k" if eta == 0.0 else "a_plus_minus"
    coeffs = [
        {"ell": ell, "coefficient": (consts.delta_star + cert.epsilon) * (ell - 2) + 0.5}
        for ell in range(3, ell_max + 1)
    ]
    return {
        "params": {"t": t, "D": D, "C": C, "eta": eta, "D0": D0},
        "constants": {
            "p_star": consts.p_star,
            "delta_star": consts.delta_star,
            "c_star": consts.c_star,
            "a_star": consts.a_star,
        },
        "results": {
            "log2_M": choose_M_log2(params),
            "clique_side_log2": clique_side_log2(params),
            "numerator_log2": independence_numerator_log2(params),
            "optimal_r": optimal_r(params),
            "f0": cert.f0,
            "fprime0_closed": fprime_closed,
            "fprime0_fd": fd_value,
            "gamma": cert.gamma,
            "D_final": cert.D,
            "epsilon": cert.epsilon,
            "final_coefficients": coeffs,
        },
        "certificate": {
            "min_margin": cert.min_margin,
            "grid_size": cert.grid_size,
            "log_base": base,
            "exponent_coefficient": exponent_expression(params, variant),
        },
    }
