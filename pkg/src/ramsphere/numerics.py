"""Special functions, root finding, scalar maximization, and log-space combinatorics.

Everything downstream (threshold solving, exponent formulas, bound sums)
funnels through this module, so the safety-critical pieces get two
independent evaluation paths:

* ``coord_cdf`` (continued fraction for the regularized incomplete beta)
  is cross-checked by ``coord_cdf_quadrature`` (adaptive quadrature of the
  coordinate density in the polar angle); tests require agreement to 1e-10.
* All probabilities of interest are symmetric-beta laws, so the continued
  fraction is only ever evaluated with one tiny shape parameter (via the
  duplication identity ``I_x(a,a) = I_{4x(1-x)}(a, 1/2)/2``), where it
  converges quickly even for sphere dimension 10**7.

Log-space arithmetic is base 2 throughout: every bound in the pipeline is
a power of two, and quantities like M**t or C(M,t) overflow any float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, NoConvergence, NoSignChange

LN2 = math.log(2.0)

__all__ = [
    "LN2",
    "Log2",
    "coord_cdf",
    "coord_cdf_quadrature",
    "find_root",
    "log2_add",
    "log2_binomial",
    "log2_factorial",
    "log2_sum",
    "log_coord_density",
    "maximize_scalar",
    "normal_cdf",
    "normal_quantile",
    "reg_inc_beta",
    "stirling2_exact",
    "stirling2_log2",
    "stirling2_log2_row",
    "validate_probability",
]


def validate_probability(value: float, name: str = "p", open_interval: bool = False) -> float:
    """Check that ``value`` is a probability; return it unchanged.

    With ``open_interval`` the endpoints 0 and 1 are rejected too.
    """
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if open_interval:
        if not 0.0 < value < 1.0:
            raise DomainError(f"{name} must lie in (0, 1), got {value!r}")
    elif not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Log-space weights (base 2)
# ---------------------------------------------------------------------------


def log2_add(a: float, b: float) -> float:
    """log2(2**a + 2**b) without overflow."""
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(2.0 ** (lo - hi)) / LN2


def log2_sum(values) -> float:
    """log2 of a sum of nonnegative terms given as base-2 logs (max-plus form)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.all(arr == -math.inf):
        return -math.inf
    hi = float(arr.max())
    return hi + math.log2(float(np.exp2(arr - hi).sum()))


@dataclass(frozen=True)
class Log2:
    """A nonnegative quantity stored as its base-2 logarithm.

    ``is_zero`` marks exact zero; ``log2_value`` is ignored in that case.
    Multiplication adds logs, addition uses the max-plus-log1p form, so the
    representable range covers log2 values way beyond float limits.
    """

    log2_value: float
    is_zero: bool = False

    @classmethod
    def zero(cls) -> "Log2":
        return cls(-math.inf, True)

    @classmethod
    def from_value(cls, value: float) -> "Log2":
        if value < 0:
            raise DomainError(f"Log2 represents nonnegative values, got {value!r}")
        if value == 0:
            return cls.zero()
        return cls(math.log2(value))

    @classmethod
    def from_log2(cls, log2_value: float) -> "Log2":
        return cls(float(log2_value))

    @classmethod
    def from_int(cls, value: int) -> "Log2":
        if value < 0:
            raise DomainError(f"Log2 represents nonnegative values, got {value!r}")
        if value == 0:
            return cls.zero()
        hi = value.bit_length() - 53
        if hi <= 0:
            return cls(math.log2(value))
        return cls(math.log2(value >> hi) + hi)

    @property
    def value(self) -> float:
        """The represented value as a float (0.0, inf on overflow)."""
        if self.is_zero:
            return 0.0
        return 2.0 ** self.log2_value

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "Log2") -> "Log2":
        if self.is_zero or other.is_zero:
            return Log2.zero()
        return Log2(self.log2_value + other.log2_value)

    def __truediv__(self, other: "Log2") -> "Log2":
        if other.is_zero:
            raise ZeroDivisionError("Log2 division by zero")
        if self.is_zero:
            return Log2.zero()
        return Log2(self.log2_value - other.log2_value)

    def __add__(self, other: "Log2") -> "Log2":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return Log2(log2_add(self.log2_value, other.log2_value))

    def __pow__(self, exponent: float) -> "Log2":
        if self.is_zero:
            if exponent <= 0:
                raise DomainError("0 ** nonpositive exponent")
            return Log2.zero()
        return Log2(self.log2_value * exponent)


# ---------------------------------------------------------------------------
# Regularized incomplete beta and the sphere-coordinate CDF
# ---------------------------------------------------------------------------

_CF_MAX_ITER = 2000
_CF_EPS = 1e-16
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz method)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise NoConvergence(f"incomplete beta continued fraction stalled at a={a}, b={b}, x={x}")


def _lgamma_diff(b: float, h: float) -> float:
    """lgamma(b + h) - lgamma(b) for 0 <= h <= 1, cancellation-free at large b.

    Direct subtraction loses ~b*eps absolute accuracy; for b >= 100 a
    Stirling-series difference keeps the result good to ~1e-15.
    """
    if b < 100.0:
        return math.lgamma(b + h) - math.lgamma(b)
    bh = b + h
    main = (b - 0.5) * math.log1p(h / b) + h * math.log(bh) - h
    s1 = -h / (12.0 * b * bh)
    s3 = (3 * b * b * h + 3 * b * h * h + h**3) / (360.0 * b**3 * bh**3)
    s5 = -(5 * b**4 * h + 10 * b**3 * h * h + 10 * b * b * h**3 + 5 * b * h**4 + h**5) / (
        1260.0 * b**5 * bh**5
    )
    return main + s1 + s3 + s5


def _log_beta(a: float, b: float) -> float:
    """ln B(a, b), accurate when one parameter is huge and the other small."""
    if a > b:
        a, b = b, a
    if a <= 1.0:
        return math.lgamma(a) - _lgamma_diff(b, a)
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) via the two-branch continued fraction."""
    if a <= 0 or b <= 0:
        raise DomainError(f"beta parameters must be positive, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lfront = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lfront) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lfront) * _betacf(b, a, 1.0 - x) / b


def _check_coord_args(k: int, s: float) -> None:
    if k < 1:
        raise DomainError(f"sphere dimension k must be >= 1, got {k}")
    if not -1.0 <= s <= 1.0:
        raise DomainError(f"coordinate s must lie in [-1, 1], got {s}")


def coord_cdf(k: int, s: float) -> float:
    """P(<x, e> <= s) for x uniform on the k-sphere.

    The coordinate u has density proportional to (1 - u^2)**((k-2)/2), i.e.
    (1 + u)/2 follows Beta(k/2, k/2). Through the duplication identity the
    symmetric beta reduces to I_{s*s}(1/2, k/2), whose continued fraction is
    well-conditioned for every k; absolute accuracy is ~1e-13.
    """
    _check_coord_args(k, s)
    if s == -1.0:
        return 0.0
    if s == 1.0:
        return 1.0
    if s == 0.0:
        return 0.5
    if s > 0.0:
        return 1.0 - coord_cdf(k, -s)
    # I_x(a, a) = I_{4x(1-x)}(a, 1/2) / 2 at x = (1+s)/2 <= 1/2, 4x(1-x) = 1-s^2
    return 0.5 * (1.0 - reg_inc_beta(0.5, k / 2.0, s * s))


def log_coord_density(k: int, u: float) -> float:
    """ln of the coordinate density (1-u^2)**((k-2)/2) / B(1/2, k/2)."""
    if not -1.0 < u < 1.0:
        return -math.inf
    return (k - 2) / 2.0 * math.log1p(-u * u) - _log_beta(0.5, k / 2.0)


def coord_cdf_quadrature(k: int, s: float, epsabs: float = 1e-12) -> float:
    """Independent cross-check of ``coord_cdf`` by adaptive quadrature.

    Integrates the coordinate density in the polar angle (u = -cos(theta)),
    where the integrand sin(theta)**(k-1) is smooth for every k >= 1. Kept
    deliberately separate from the continued-fraction path.
    """
    _check_coord_args(k, s)
    if s == -1.0:
        return 0.0
    if s == 1.0:
        return 1.0
    log_norm = _log_beta(0.5, k / 2.0)

    def integrand(theta: float) -> float:
        sin_t = math.sin(theta)
        if sin_t <= 0.0:
            return 0.0
        return math.exp((k - 1) * math.log(sin_t) - log_norm)

    theta_hi = math.acos(-s)
    half = math.pi / 2.0
    interior = [half] if 0.0 < half < theta_hi else []
    if k > 16:
        # give the adaptive rule the O(1/sqrt(k)) peak structure
        width = 12.0 / math.sqrt(k)
        interior = [t for t in (half - width, half, half + width) if 0.0 < t < theta_hi]
    val, err = integrate.quad(
        integrand, 0.0, theta_hi, points=interior or None, epsabs=epsabs, epsrel=1e-13, limit=300
    )
    return min(1.0, max(0.0, val))


# ---------------------------------------------------------------------------
# Normal CDF / quantile
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def normal_cdf(z: float) -> float:
    """Standard normal CDF via erfc (accurate in both tails)."""
    return 0.5 * math.erfc(-z / _SQRT2)


def normal_quantile(q: float) -> float:
    """z with Phi(z) = q, to absolute accuracy 1e-10.

    Bracketed inversion of the erfc-based CDF; the bracket covers every
    normal double q in (0, 1).
    """
    validate_probability(q, "q")
    if q == 0.0 or q == 1.0:
        raise DomainError(f"normal quantile undefined at q={q}")
    if q == 0.5:
        return 0.0
    return find_root(lambda z: normal_cdf(z) - q, -40.0, 40.0, tol=1e-12, ftol=0.0)


# ---------------------------------------------------------------------------
# Root finding and scalar maximization
# ---------------------------------------------------------------------------

_EPS = 2.220446049250313e-16


def find_root(
    f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200, ftol: float | None = None
) -> float:
    """Root of a continuous monotone f on a sign-changing bracket [lo, hi].

    Brent's method: bisection safeguarded by secant / inverse quadratic
    interpolation. Stops when |f| <= ftol (defaults to ``tol``) or the
    bracket width <= tol (plus the machine-precision floor), within
    ``max_iter`` iterations. Pass ftol=0 to demand width convergence, e.g.
    when the function value scale is far below the x scale of interest.
    """
    if ftol is None:
        ftol = tol
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise NoSignChange(f"no sign change on [{lo}, {hi}]: f(lo)={fa!r}, f(hi)={fb!r}")
    c, fc = a, fa
    e = d = b - a
    for _ in range(max_iter):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0 or abs(fb) <= ftol:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            e = d = b - a
    raise NoConvergence(f"no convergence after {max_iter} iterations on [{lo}, {hi}]")


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_scalar(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """(argmax, max) of a unimodal f on [lo, hi] by golden-section search."""
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            xm = 0.5 * (a + b)
            return xm, f(xm)
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
    raise NoConvergence(f"no convergence after {max_iter} golden-section iterations")


# ---------------------------------------------------------------------------
# Log-space combinatorics
# ---------------------------------------------------------------------------


def stirling2_exact(t: int, r: int) -> int:
    """Stirling number of the second kind {t over r}, exact integer."""
    if t < 0 or r < 0:
        raise DomainError(f"need t, r >= 0, got t={t}, r={r}")
    if r > t:
        raise DomainError(f"need r <= t, got t={t}, r={r}")
    row = [1]
    for n in range(1, t + 1):
        new = [0] * (n + 1)
        for j in range(1, n + 1):
            new[j] = j * (row[j] if j < len(row) else 0) + row[j - 1]
        row = new
    return row[r]


def stirling2_log2_row(t: int) -> np.ndarray:
    """Array of log2({t over r}) for r = 0..t (log-space DP; -inf marks zero)."""
    if t < 0:
        raise DomainError(f"need t >= 0, got {t}")
    row = np.full(t + 1, -math.inf)
    row[0] = 0.0
    for n in range(1, t + 1):
        prev = row.copy()
        row[0] = -math.inf
        for j in range(1, n + 1):
            grow = prev[j] + math.log2(j)  # -inf propagates where {n-1, j} = 0
            row[j] = log2_add(grow, prev[j - 1])
    return row


def stirling2_log2(t: int, r: int) -> float:
    """log2 of {t over r}, accurate to ~1e-10 relative in the log."""
    if r > t or r < 0 or t < 0:
        raise DomainError(f"need 0 <= r <= t, got t={t}, r={r}")
    return float(stirling2_log2_row(t)[r])


def log2_factorial(r: int) -> float:
    """log2(r!)."""
    if r < 0:
        raise DomainError(f"need r >= 0, got {r}")
    return math.lgamma(r + 1.0) / LN2


def log2_binomial(n, r: int) -> float:
    """log2 of the (generalized) binomial coefficient C(n, r).

    ``n`` may be an int, a float, or a ``Log2`` carrying log2(n) for
    astronomically large n. Evaluates sum_{i<r} log2(n - i) - log2(r!),
    with the n - i factors formed stably from log2(n) in the huge case.
    """
    if r < 0:
        raise DomainError(f"need r >= 0, got r={r}")
    if r == 0:
        return 0.0
    if isinstance(n, Log2):
        if n.is_zero:
            raise DomainError("binomial of zero-valued Log2")
        log2n = n.log2_value
        if log2n < math.log2(r):
            raise DomainError(f"need n >= r, got log2(n)={log2n} < log2({r})")
        inv_n = 2.0 ** (-log2n)  # underflows harmlessly to 0 for huge n
        total = 0.0
        for i in range(r):
            total += log2n + math.log1p(-i * inv_n) / LN2
        return total - log2_factorial(r)
    if isinstance(n, int) and n < r:
        raise DomainError(f"need n >= r for integer n, got n={n}, r={r}")
    if n < r:
        raise DomainError(f"need n >= r, got n={n}, r={r}")
    total = 0.0
    for i in range(r):
        total += math.log2(n - i)
    return total - log2_factorial(r)
