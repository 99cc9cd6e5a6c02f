"""Drift polynomial, taming, regularization, and certified constants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamedspde import (
    ALLEN_CAHN,
    DriftSpec,
    TamingParams,
    derive_growth_constants,
    f_delta_eval,
    f_delta_prime_eval,
    f_eval,
    f_prime_eval,
    f_tau_eval,
    step_size_condition,
)
from tamedspde.drift import (
    check_delta_derivative_growth,
    check_one_sided_delta_derivative,
    check_power_mean_inequality,
    check_taming_domination,
    check_taming_gap,
    verification_grid,
)


class TestDriftSpec:
    def test_allen_cahn_values(self):
        assert f_eval(ALLEN_CAHN, 0.0) == 0.0
        assert f_eval(ALLEN_CAHN, 1.0) == 0.0
        assert f_eval(ALLEN_CAHN, 2.0) == -6.0

    def test_vectorized(self):
        v = np.array([-1.0, 0.0, 0.5, 2.0])
        assert np.allclose(f_eval(ALLEN_CAHN, v), v - v**3)

    def test_rejects_nonpositive_leading(self):
        with pytest.raises(ValueError):
            DriftSpec(q=2, leading=0.0)
        with pytest.raises(ValueError):
            DriftSpec(q=2, leading=-1.0, lower=(0.0, 1.0))

    def test_rejects_q_below_two(self):
        with pytest.raises(ValueError):
            DriftSpec(q=1, leading=1.0)

    def test_rejects_oversized_f0(self):
        with pytest.raises(ValueError):
            DriftSpec(q=2, leading=1.0, lower=(0.0, 0.0, 0.0, 1.0))

    def test_quintic(self):
        d = DriftSpec(q=3, leading=2.0, lower=(0.0, 3.0))
        v = np.linspace(-2, 2, 41)
        assert np.allclose(f_eval(d, v), -2.0 * v**5 + 3.0 * v)


class TestTamedDrift:
    def setup_method(self):
        self.params = TamingParams(alpha=1.0, beta=5.0, theta=0.5, tau=2.0**-10)

    def test_zeros_preserved(self):
        assert f_tau_eval(ALLEN_CAHN, self.params, 0.0) == 0.0
        assert f_tau_eval(ALLEN_CAHN, self.params, 1.0) == 0.0

    def test_direct_arithmetic(self):
        # f(2) = -6 over 1 + 5 * 2^-5 * 4 = 1.625
        got = f_tau_eval(ALLEN_CAHN, self.params, 2.0)
        assert got == pytest.approx(-6.0 / 1.625, rel=1e-15)
        assert got == pytest.approx(-3.6923077, abs=1e-7)

    @pytest.mark.parametrize("alpha", [1.0, 0.5, 1.0 / 3.0, 0.25])
    def test_fast_power_paths_match_reference(self, alpha):
        params = TamingParams(alpha=alpha, beta=5.0, theta=0.5, tau=2.0**-8)
        v = np.linspace(-30, 30, 1001)
        x = 5.0 * (2.0**-8) ** 0.5 * np.abs(v) ** ((2 * 2 - 2) / alpha)
        expected = f_eval(ALLEN_CAHN, v) / (1.0 + x) ** alpha
        assert np.allclose(f_tau_eval(ALLEN_CAHN, params, v), expected,
                           rtol=1e-12, atol=1e-300)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            TamingParams(alpha=0.0, beta=5.0, theta=0.5, tau=1e-3)
        with pytest.raises(ValueError):
            TamingParams(alpha=2.5, beta=5.0, theta=0.5, tau=1e-3)
        with pytest.raises(ValueError):
            TamingParams(alpha=1.0, beta=-5.0, theta=0.5, tau=1e-3)
        with pytest.raises(ValueError):
            TamingParams(alpha=1.0, beta=5.0, theta=0.5, tau=0.0)

    @given(
        v=st.floats(-1e3, 1e3),
        beta=st.floats(0.1, 100.0),
        tau=st.floats(2.0**-14, 0.25),
        theta=st.floats(0.1, 0.9),
    )
    @settings(max_examples=200, deadline=None)
    def test_domination_property(self, v, beta, tau, theta):
        params = TamingParams(alpha=min(1.0, 0.99 / theta), beta=beta,
                              theta=theta, tau=tau)
        assert abs(f_tau_eval(ALLEN_CAHN, params, v)) <= abs(
            f_eval(ALLEN_CAHN, v)
        ) * (1 + 1e-12) + 1e-300


class TestRegularizedDrift:
    def test_zero(self):
        assert f_delta_eval(ALLEN_CAHN, 1.0, 0.0) == 0.0

    def test_direct_arithmetic(self):
        assert f_delta_eval(ALLEN_CAHN, 1.0, 2.0) == pytest.approx(-1.2, rel=1e-15)

    def test_pointwise_limit(self):
        # exact value -6 / (1 + 1e-6 * 4); the gap to f(2) = -6 is 2.4e-5
        assert f_delta_eval(ALLEN_CAHN, 1e-12, 2.0) == pytest.approx(
            -6.0 / (1.0 + 4e-6), rel=1e-14
        )
        assert abs(f_delta_eval(ALLEN_CAHN, 1e-12, 2.0) + 6.0) < 3e-5
        assert abs(f_delta_eval(ALLEN_CAHN, 1e-13, 2.0) + 6.0) < 1e-5

    @pytest.mark.parametrize("delta", [0.0, -0.5, 1.5])
    def test_domain(self, delta):
        with pytest.raises(ValueError):
            f_delta_eval(ALLEN_CAHN, delta, 1.0)
        with pytest.raises(ValueError):
            f_delta_prime_eval(ALLEN_CAHN, delta, 1.0)


class TestDerivatives:
    def test_prime_values(self):
        assert f_prime_eval(ALLEN_CAHN, 0.0) == 1.0
        assert f_prime_eval(ALLEN_CAHN, 1.0) == -2.0

    def test_delta_prime_at_origin(self):
        assert f_delta_prime_eval(ALLEN_CAHN, 1.0, 0.0) == pytest.approx(
            f_prime_eval(ALLEN_CAHN, 0.0), rel=1e-14
        )

    @pytest.mark.parametrize("delta", [1.0, 1e-2, 1e-4])
    def test_delta_prime_matches_finite_difference(self, delta):
        v = np.linspace(-5.0, 5.0, 201)
        step = 1e-6
        fd = (f_delta_eval(ALLEN_CAHN, delta, v + step)
              - f_delta_eval(ALLEN_CAHN, delta, v - step)) / (2 * step)
        exact = f_delta_prime_eval(ALLEN_CAHN, delta, v)
        assert np.allclose(exact, fd, rtol=1e-6, atol=1e-6)


class TestGrowthConstants:
    def test_allen_cahn_constants(self):
        dc = derive_growth_constants(ALLEN_CAHN)
        assert dc.c3 == 1.0
        assert dc.c4 == 1.0
        assert dc.c5 == 0.0
        assert dc.L_f == pytest.approx(1.0, abs=1e-9)
        assert dc.c0 == 0.5

    def test_growth_bound_on_grid(self):
        dc = derive_growth_constants(ALLEN_CAHN)
        u = verification_grid(n=20_000)
        assert np.all(
            np.abs(f_eval(ALLEN_CAHN, u))
            <= dc.c3 * np.abs(u) ** 3 + dc.c4 * np.abs(u) + dc.c5 + 1e-9
        )

    def test_one_sided_lipschitz_on_grid(self):
        dc = derive_growth_constants(ALLEN_CAHN)
        u = verification_grid(n=20_000)
        assert np.all(f_prime_eval(ALLEN_CAHN, u) <= dc.L_f + 1e-12)

    def test_coercivity_on_grid(self):
        dc = derive_growth_constants(ALLEN_CAHN)
        pts = np.linspace(-900.0, 900.0, 301)
        u = pts[:, None]
        v = pts[None, :]
        lhs = (u + v) * f_eval(ALLEN_CAHN, u)
        rhs = -dc.c0 * u**4 + dc.c1 * v**4 + dc.c2
        assert np.all(lhs <= rhs + 1e-6 * np.maximum(1.0, np.abs(rhs)))

    def test_adversarial_leading_rejected(self):
        with pytest.raises(ValueError):
            DriftSpec(q=2, leading=-1.0)

    def test_certification_failure_names_the_violation(self):
        # dissipative only far outside the verification grid: the
        # coercivity supremum escapes to the boundary for every candidate
        from tamedspde import DriftDerivationError

        monster = DriftSpec(q=2, leading=1e-9, lower=(0.0, 0.0, 1e6))
        with pytest.raises(DriftDerivationError, match=r"\(u, v\)"):
            derive_growth_constants(monster)


class TestStepSizeCondition:
    def setup_method(self):
        self.dc = derive_growth_constants(ALLEN_CAHN)

    def test_admissible_beta100(self):
        params = TamingParams(alpha=1.0, beta=100.0, theta=0.5, tau=2.0**-10)
        verdict = step_size_condition(self.dc, params, 0.01)
        assert verdict.admissible
        # LHS = 2 * 2^-5 = 0.0625, RHS = 0.5 * 100 * 0.01 = 0.5
        assert verdict.ratio == pytest.approx(0.125, rel=1e-12)

    def test_violated_beta5(self):
        params = TamingParams(alpha=1.0, beta=5.0, theta=0.5, tau=2.0**-10)
        verdict = step_size_condition(self.dc, params, 0.01)
        assert not verdict.admissible
        assert verdict.ratio == pytest.approx(2.5, rel=1e-12)

    def test_vanishing_tau_admissible(self):
        params = TamingParams(alpha=1.0, beta=5.0, theta=0.5, tau=2.0**-40)
        assert step_size_condition(self.dc, params, 0.01).admissible

    def test_bad_epsilon(self):
        params = TamingParams(alpha=1.0, beta=5.0, theta=0.5, tau=1e-3)
        with pytest.raises(ValueError):
            step_size_condition(self.dc, params, 0.0)


class TestInvariantChecks:
    def test_taming_domination(self):
        result = check_taming_domination(ALLEN_CAHN, n=20_000, seed=7)
        assert result.passed, result.counterexample

    def test_taming_gap(self):
        result = check_taming_gap(ALLEN_CAHN, n=20_000, seed=8)
        assert result.passed, result.counterexample

    def test_one_sided_delta_derivative(self):
        result = check_one_sided_delta_derivative(ALLEN_CAHN)
        assert result.passed, result.counterexample

    def test_delta_derivative_growth(self):
        result = check_delta_derivative_growth(ALLEN_CAHN)
        assert result.passed, result.counterexample

    def test_power_mean_inequality(self):
        result = check_power_mean_inequality(n=20_000, seed=9)
        assert result.passed, result.counterexample

    def test_power_mean_inequality_tightness(self):
        # rho = 1 collapses the inequality to (A + rB) <= A + r(1 + 2e^0)B,
        # so violations of a wrongly transcribed bound would be caught
        rng = np.random.default_rng(0)
        A, B = rng.uniform(0, 10, (2, 1000))
        r = rng.uniform(0.1, 2.0, 1000)
        lhs = A + r * B
        rhs = A + r * (1.0 + 2.0 * (1.0 + 1.0)) * B
        assert np.all(lhs <= rhs * (1 + 1e-12))
