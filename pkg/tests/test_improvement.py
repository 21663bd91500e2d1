import math

import mpmath as mp
import numpy as np
import pytest

from ramsphere.errors import DomainError, InadmissibleParameters
from ramsphere.improvement import (
    BoundParams,
    analysis_report,
    bound_params,
    choose_M_log2,
    clique_side_log2,
    eq9_exponent_log2,
    exponent_expression,
    f_of_x,
    f_prime_zero_closed,
    f_prime_zero_fd,
    find_gamma_epsilon,
    independence_numerator_log2,
    optimal_r,
    pq_pair,
)
from ramsphere.numerics import log2_factorial, stirling2_exact

mp.mp.dps = 60


def mp_oracle(t: int, D: float, C: float, a_k: float, p: float):
    """High-precision (60-digit) evaluation of the clique-side bound and the
    full independence sum; the same closed formulas, none of the log-space
    machinery."""
    p = mp.mpf(p)
    a = mp.mpf(a_k)
    D_ = mp.mpf(D)
    C_ = mp.mpf(C)
    M = (p - a / (D_ * p**2) + C_ / D_**2) ** (-mp.mpf(t) / 2)

    def binom(x, r):
        out = mp.mpf(1)
        for i in range(r):
            out *= x - i
        return out / mp.factorial(r)

    cb = p - a / (D_ * p**2) + C_ / D_**2 + 2 * a / (D_ * p**2 * t)
    clique = binom(M, t) * (1 + mp.mpf(2) ** -t) * cb ** (t * (t - 1) // 2)
    sqrt_k = D_ * t
    total = mp.mpf(0)
    for r in range(1, t + 1):
        ib = 1 - p + a * (r - 2) / ((1 - p) ** 2 * sqrt_k) + C_ / D_**2
        total += (
            binom(M, r)
            * stirling2_exact(t, r)
            * mp.factorial(r)
            / M**t
            * (1 + mp.mpf(2) ** -t)
            * ib ** (r * (r - 1) // 2)
        )
    log2 = lambda v: float(mp.log(v) / mp.log(2))
    return log2(clique), log2(total)


class TestChooseM:
    def test_limit_coefficient(self, consts):
        # C = 0 and D huge kill the corrections: log2(M)/t -> -log2(p*)/2
        params = BoundParams(t=1000, D=1e12, C=1e-30, eta=0.0, D0=10.0,
                             a_k=consts.a_star, a=consts.a_star, p=consts.p_star)
        assert choose_M_log2(params) / 1000 == pytest.approx(0.56804, abs=1e-5)
        assert choose_M_log2(params) / 1000 == pytest.approx(
            -math.log2(consts.p_star) / 2, abs=1e-9
        )

    def test_worked_example(self):
        params = bound_params(t=100, D=100.0, C=1.0, a_k=0.02076)
        base = params.p - 0.02076 / (100 * params.p**2) + 1e-4
        assert base == pytest.approx(0.454095, abs=2e-6)
        assert choose_M_log2(params) == pytest.approx(-50 * math.log2(base), abs=1e-12)
        assert choose_M_log2(params) == pytest.approx(56.946, abs=2e-3)

    def test_increases_as_D_decreases(self):
        vals = [choose_M_log2(bound_params(t=50, D=D, C=1e-12)) for D in (400, 200, 100, 50)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_inadmissible(self, consts):
        bad = BoundParams(t=10, D=0.01, C=1e-9, eta=0.0, D0=10.0,
                          a_k=consts.a_star, a=consts.a_star, p=consts.p_star)
        with pytest.raises(InadmissibleParameters):
            choose_M_log2(bad)


class TestCliqueSide:
    def test_bound_below_one_at_working_point(self):
        assert clique_side_log2(bound_params(t=100, D=100.0, C=1.0)) < 0

    def test_tends_to_minus_infinity(self):
        vals = [clique_side_log2(bound_params(t=t, D=100.0, C=1.0)) for t in (20, 50, 100, 200)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < -1000

    @pytest.mark.parametrize("t,D,C", [(5, 200.0, 0.5), (10, 50.0, 1.0), (14, 30.0, 2.0)])
    def test_matches_high_precision_oracle(self, t, D, C, consts):
        params = bound_params(t=t, D=D, C=C)
        want, _ = mp_oracle(t, D, C, params.a_k, params.p)
        assert clique_side_log2(params) == pytest.approx(want, abs=1e-9)


class TestIndependenceNumerator:
    def test_t1_forced_value(self, consts):
        # single term r=1: C(M,1) * 1!/M^1 = 1, times (1 + 2^-1)
        params = BoundParams(t=1, D=50.0, C=1.0, eta=0.0, D0=10.0,
                             a_k=consts.a_star, a=consts.a_star, p=consts.p_star)
        assert independence_numerator_log2(params) == pytest.approx(math.log2(1.5), abs=1e-12)

    @pytest.mark.parametrize(
        "t,D,C", [(5, 200.0, 0.5), (10, 50.0, 1.0), (10, 100.0, 1.0), (14, 30.0, 2.0), (14, 100.0, 1.0)]
    )
    def test_matches_high_precision_oracle(self, t, D, C):
        params = bound_params(t=t, D=D, C=C)
        _, want = mp_oracle(t, D, C, params.a_k, params.p)
        assert independence_numerator_log2(params) == pytest.approx(want, abs=1e-9)

    def test_max_term_bound_dominates_sum(self):
        # sum <= 2 t! max_r 2^(quadratic exponent)
        for t in (5, 8, 11, 14):
            params = bound_params(t=t, D=50.0, C=1.0)
            best = max(eq9_exponent_log2(params, r) for r in range(1, t + 1))
            bound = 1.0 + log2_factorial(t) + best
            assert independence_numerator_log2(params) <= bound + 1e-9

    def test_exponent_concave_in_r(self):
        params = bound_params(t=100, D=100.0, C=1.0)
        vals = [eq9_exponent_log2(params, r) for r in range(1, 101)]
        second = np.diff(vals, 2)
        assert (second <= 1e-12).all()

    def test_t_cap(self):
        with pytest.raises(DomainError):
            independence_numerator_log2(bound_params(t=201, D=100.0, C=1.0))


class TestOptimalR:
    def test_small_x_limit(self, consts):
        params = bound_params(t=1000, D=1e9, C=1e-20)
        slope = math.log(consts.p_star) / (2 * math.log(1 - consts.p_star))
        assert optimal_r(params) == pytest.approx(0.5 + 1000 * slope, abs=1e-4)
        assert slope == pytest.approx(0.64869, abs=1e-5)

    def test_maximizer_beats_neighbors(self):
        params = bound_params(t=100, D=100.0, C=1.0)
        r = optimal_r(params)
        at = eq9_exponent_log2(params, r)
        assert at >= eq9_exponent_log2(params, r - 1)
        assert at >= eq9_exponent_log2(params, r + 1)

    def test_matches_integer_argmax_scan(self):
        params = bound_params(t=100, D=100.0, C=1.0)
        scan = max(range(1, 101), key=lambda r: eq9_exponent_log2(params, r))
        assert abs(optimal_r(params) - scan) <= 1.0

    def test_linear_in_t(self):
        p1 = bound_params(t=100, D=200.0, C=1.0)
        p2 = bound_params(t=200, D=200.0, C=1.0)
        slope1 = (optimal_r(p1) - 0.5) / 100
        slope2 = (optimal_r(p2) - 0.5) / 200
        assert slope1 == pytest.approx(slope2, abs=1e-12)  # same x = 1/D


class TestExponentExpression:
    def test_limit_is_minus_delta_star(self, consts):
        params = bound_params(t=100, D=1e10, C=1.0)
        assert exponent_expression(params) == pytest.approx(-consts.delta_star, abs=1e-8)

    def test_split_collapses_at_eta_zero(self):
        params = bound_params(t=100, D=100.0, C=1.0, eta=0.0)
        assert exponent_expression(params, "a_plus_minus") == pytest.approx(
            exponent_expression(params, "a_k"), abs=1e-12
        )

    def test_split_is_weaker_for_positive_eta(self):
        params = bound_params(t=100, D=100.0, C=1.0, eta=0.01)
        assert exponent_expression(params, "a_plus_minus") >= exponent_expression(params, "a_k")

    def test_monotone_approach_from_below(self, consts):
        # f'(0) > 0 makes finite-D coefficients MORE negative than -delta*,
        # increasing toward it along a geometric D grid
        vals = [
            exponent_expression(bound_params(t=100, D=D, C=1.0))
            for D in (200.0, 400.0, 800.0, 1600.0, 1e4, 1e5, 1e6)
        ]
        assert all(v < -consts.delta_star for v in vals)
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestF:
    def test_f0_base_two_is_delta_star(self, consts):
        a = consts.a_star
        assert f_of_x(0.0, 1.0, a, a, "two") == pytest.approx(0.383796, abs=1e-5)
        assert f_of_x(0.0, 123.0, a, a, "two") == pytest.approx(consts.delta_star, abs=1e-12)

    def test_f0_natural(self, consts):
        a = consts.a_star
        assert f_of_x(0.0, 1.0, a, a, "natural") == pytest.approx(0.26603, abs=1e-5)
        assert f_of_x(0.0, 1.0, a, a, "natural") == pytest.approx(
            consts.delta_star * math.log(2), abs=1e-12
        )

    def test_growth_inequality_on_certified_range(self, consts):
        a = consts.a_star
        params = bound_params(t=100, D=100.0, C=1.0)
        cert = find_gamma_epsilon(params, base="natural")
        f0 = f_of_x(0.0, 1.0, a, a, "natural")
        for x in np.geomspace(cert.gamma * 1e-4, cert.gamma, 200):
            assert f_of_x(float(x), 1.0, a, a, "natural") >= f0 + 0.5 * a * float(x) - 1e-15

    def test_inadmissible_x(self, consts):
        a = consts.a_star
        with pytest.raises(InadmissibleParameters):
            f_of_x(5.0, 1e6, a, a, "two")
        with pytest.raises(InadmissibleParameters):
            pq_pair(0.9, 0.0, 1.0)


class TestFPrimeZero:
    def test_headline_ratio(self, consts):
        assert f_prime_zero_closed(consts.p_star, 1.0, 0.0, "natural") == pytest.approx(
            0.5653, abs=5e-4
        )

    def test_value_at_a_star(self, consts):
        got = f_prime_zero_closed(consts.p_star, consts.a_star, 0.0, "natural")
        assert got == pytest.approx(0.011735, abs=1e-5)

    def test_base_ratio(self, consts):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = float(rng.uniform(0.05, 0.49))
            a = float(rng.uniform(1e-3, 1.0))
            nat = f_prime_zero_closed(p, a, 0.0, "natural")
            two = f_prime_zero_closed(p, a, 0.0, "two")
            assert nat / two == pytest.approx(math.log(2), rel=1e-10)

    def test_eta_rejected_naming_h(self, consts):
        with pytest.raises(DomainError, match="h"):
            f_prime_zero_closed(consts.p_star, 1.0, 0.5)

    def test_fd_matches_closed_form(self, consts):
        rng = np.random.default_rng(11)
        a = consts.a_star
        for _ in range(20):
            C = float(rng.uniform(0.01, 10.0))
            want = f_prime_zero_closed(consts.p_star, a, 0.0, "natural")
            got, err = f_prime_zero_fd(C, a, "natural")
            assert got == pytest.approx(want, rel=1e-4)
            assert err < abs(got) * 1e-3

    def test_fd_independent_of_C(self, consts):
        a = consts.a_star
        lo, _ = f_prime_zero_fd(0.01, a, "natural")
        hi, _ = f_prime_zero_fd(10.0, a, "natural")
        assert lo == pytest.approx(hi, rel=1e-4)

    def test_positive_in_both_bases(self, consts):
        a = consts.a_star
        assert f_prime_zero_fd(1.0, a, "natural")[0] > 0
        assert f_prime_zero_fd(1.0, a, "two")[0] > 0
        assert f_prime_zero_closed(consts.p_star, a, 0.0, "natural") > 0
        assert f_prime_zero_closed(consts.p_star, a, 0.0, "two") > 0


class TestGammaEpsilon:
    def test_default_certificate(self, consts):
        params = bound_params(t=100, D=100.0, C=1.0, eta=0.0, D0=10.0)
        cert = find_gamma_epsilon(params, base="two")
        assert cert.gamma > 0
        assert cert.gamma <= 1.0 / 10.0
        assert cert.min_margin >= 0
        assert cert.epsilon > 0
        assert cert.epsilon == pytest.approx(0.5 * consts.a_star / cert.D, rel=1e-12)
        assert cert.D == max(10.0, 1.0 / cert.gamma)

    def test_margin_at_half_gamma_first_order(self, consts):
        # slope budget: f'(0) ~ 0.565a against 0.5a leaves ~0.065a x to first order
        a = consts.a_star
        params = bound_params(t=100, D=100.0, C=1.0, eta=0.0, D0=10.0)
        cert = find_gamma_epsilon(params, base="natural")
        x = cert.gamma / 2
        f0 = f_of_x(0.0, 1.0, a, a, "natural")
        margin = f_of_x(x, 1.0, a, a, "natural") - f0 - 0.5 * a * x
        assert margin >= 0
        first_order = 0.065 * a * x
        assert first_order / 2 <= margin <= first_order * 2

    def test_final_coefficient_beats_baseline(self, consts):
        params = bound_params(t=100, D=100.0, C=1.0)
        cert = find_gamma_epsilon(params)
        for ell in range(3, 13):
            improved = (consts.delta_star + cert.epsilon) * (ell - 2) + 0.5
            assert improved > consts.delta_star * (ell - 2) + 0.5

    def test_no_admissible_gamma_at_large_eta(self):
        # the eta-split erodes the slope below the 0.5a budget
        params = bound_params(t=100, D=100.0, C=1.0, eta=0.3)
        with pytest.raises(InadmissibleParameters, match="gamma"):
            find_gamma_epsilon(params, base="two")

    def test_small_eta_still_certifies(self):
        params = bound_params(t=100, D=100.0, C=1.0, eta=0.01)
        cert = find_gamma_epsilon(params, base="two")
        assert cert.epsilon > 0

    def test_grid_floor(self):
        params = bound_params(t=100, D=100.0, C=1.0)
        with pytest.raises(DomainError):
            find_gamma_epsilon(params, grid_size=100)


class TestReport:
    def test_schema_fields(self):
        rep = analysis_report(t=100, D=100.0, C=1.0, eta=0.0, D0=10.0)
        assert set(rep["params"]) == {"t", "D", "C", "eta", "D0"}
        assert set(rep["constants"]) == {"p_star", "delta_star", "c_star", "a_star"}
        results = rep["results"]
        for key in (
            "log2_M", "clique_side_log2", "numerator_log2", "optimal_r", "f0",
            "fprime0_closed", "fprime0_fd", "gamma", "D_final", "epsilon",
            "final_coefficients",
        ):
            assert key in results
        assert results["epsilon"] > 0
        assert [row["ell"] for row in results["final_coefficients"]] == list(range(3, 13))

    def test_fprime_mode_errors(self):
        with pytest.raises(DomainError, match="h"):
            analysis_report(t=100, D=100.0, C=1.0, eta=0.01, fprime_mode="closed")
        with pytest.raises(DomainError):
            analysis_report(t=100, D=100.0, C=1.0, eta=0.01, fprime_mode="fd")

    def test_eta_auto_nulls_derivatives(self):
        rep = analysis_report(t=100, D=100.0, C=1.0, eta=0.01, fprime_mode="auto")
        assert rep["results"]["fprime0_closed"] is None
        assert rep["results"]["fprime0_fd"] is None
        assert rep["results"]["epsilon"] > 0
