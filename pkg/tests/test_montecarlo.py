"""Monte Carlo error estimates against normal-CDF oracles, and bound checks."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from pxkit import (
    ErrorProbEstimate,
    SimpleHypotheses,
    check_bound,
    derive_seed,
    estimate_phi_errors,
    estimate_psi_errors,
    expanded_bound,
    make_exponential_rate,
    make_normal_location,
    make_normal_variance_expansion,
    make_two_stage_normal,
    marginal_bound,
    phi_decide,
    row_seed,
    sweep,
)

PHI_EXACT = float(norm.cdf(-0.5))          # error prob of the t1 test, sigma=1, delta=1
PSI_EXACT = float(norm.cdf(-1 / math.sqrt(2)))  # same for the joint test on the 1+1 split

NORMAL = make_normal_location(1.0)
HYP = SimpleHypotheses(0.0, 1.0)


class TestPhiEstimates:
    def test_matches_normal_cdf_oracle(self):
        est = estimate_phi_errors(NORMAL, HYP, 10**6, seed=42)
        assert abs(est.alpha_hat - PHI_EXACT) < 0.0012
        assert abs(est.beta_hat - PHI_EXACT) < 0.0012

    def test_half_width_formula(self):
        est = estimate_phi_errors(NORMAL, HYP, 10**5, seed=1)
        expected = 2.576 * math.sqrt(est.alpha_hat * (1 - est.alpha_hat) / est.replicates)
        assert est.half_width_alpha == pytest.approx(expected, rel=1e-12)

    def test_wide_separation_is_near_zero(self):
        est = estimate_phi_errors(NORMAL, SimpleHypotheses(0.0, 10.0), 10**5, seed=2)
        assert est.alpha_hat + est.beta_hat < 0.001

    def test_determinism(self):
        a = estimate_phi_errors(NORMAL, HYP, 10**4, seed=77)
        b = estimate_phi_errors(NORMAL, HYP, 10**4, seed=77)
        assert a == b

    def test_minimum_replicates(self):
        with pytest.raises(ValueError):
            estimate_phi_errors(NORMAL, HYP, 99, seed=0)

    def test_vectorized_decisions_agree_with_scalar_rule(self):
        # Rebuild the two streams the estimator uses and replay them through
        # the scalar decision function.
        n, seed = 500, 31
        est = estimate_phi_errors(NORMAL, HYP, n, seed=seed)
        d0 = NORMAL.density_at(HYP.theta0)
        d1 = NORMAL.density_at(HYP.theta1)
        t_h0 = d0.sample(n, derive_seed(seed, 0))
        t_h1 = d1.sample(n, derive_seed(seed, 1))
        alpha = np.mean([phi_decide(float(t), NORMAL, HYP).reject_h0 for t in t_h0])
        beta = np.mean([not phi_decide(float(t), NORMAL, HYP).reject_h0 for t in t_h1])
        assert est.alpha_hat == pytest.approx(float(alpha), abs=1e-12)
        assert est.beta_hat == pytest.approx(float(beta), abs=1e-12)


class TestPsiEstimates:
    def test_two_stage_matches_oracle(self):
        em = make_two_stage_normal(1, 1, 1.0)
        est = estimate_psi_errors(em, HYP, 10**6, seed=42)
        assert abs(est.alpha_hat - PSI_EXACT) < 0.0012
        assert abs(est.beta_hat - PSI_EXACT) < 0.0012

    def test_variance_expansion_collapses_to_phi(self):
        em = make_normal_variance_expansion(4)
        psi_est = estimate_psi_errors(em, HYP, 10**5, seed=5)
        phi_est = estimate_phi_errors(em.marginal, HYP, 10**5, seed=6)
        cushion = (
            psi_est.half_width_alpha
            + phi_est.half_width_alpha
            + psi_est.half_width_beta
            + phi_est.half_width_beta
        )
        assert abs(psi_est.error_sum - phi_est.error_sum) < cushion

    def test_half_widths_shrink_with_replicates(self):
        em = make_two_stage_normal(1, 1, 1.0)
        small = estimate_psi_errors(em, HYP, 100, seed=9)
        large = estimate_psi_errors(em, HYP, 10**6, seed=9)
        assert small.half_width_alpha >= large.half_width_alpha
        assert small.half_width_beta >= large.half_width_beta

    def test_error_sum_reduction_is_visible(self):
        # Joint-test error sum drops below the t1-only error sum, and each
        # respects its own affinity bound.
        em = make_two_stage_normal(1, 1, 1.0)
        psi_est = estimate_psi_errors(em, HYP, 10**5, seed=8)
        phi_est = estimate_phi_errors(em.marginal, HYP, 10**5, seed=8)
        assert abs(phi_est.error_sum - 2 * PHI_EXACT) < 0.01
        assert abs(psi_est.error_sum - 2 * PSI_EXACT) < 0.01
        assert psi_est.error_sum < phi_est.error_sum
        assert check_bound(phi_est, marginal_bound(em.marginal, HYP).value).satisfied
        assert check_bound(psi_est, expanded_bound(em, HYP).value).satisfied


class TestCheckBound:
    def test_slack_against_oracles(self):
        est = ErrorProbEstimate(0.3085, 0.3085, 10**6, 0, 0.00119, 0.00119)
        chk = check_bound(est, 0.8824969025845955)
        assert chk.satisfied
        assert chk.slack == pytest.approx(0.2655, abs=1e-3)

    def test_psi_oracle_slack(self):
        est = ErrorProbEstimate(0.2398, 0.2398, 10**6, 0, 0.0011, 0.0011)
        chk = check_bound(est, 0.7788007830714049)
        assert chk.satisfied
        assert chk.slack == pytest.approx(0.2992, abs=1e-3)

    def test_violation_detected(self):
        est = ErrorProbEstimate(0.6, 0.5, 1000, 0, 0.01, 0.01)
        assert not check_bound(est, 1.0).satisfied

    def test_bound_range_validated(self):
        est = ErrorProbEstimate(0.1, 0.1, 1000, 0, 0.01, 0.01)
        with pytest.raises(ValueError):
            check_bound(est, 1.5)


class TestSweep:
    def test_rows_have_positive_slack(self):
        table = sweep("phi", NORMAL, 0.0, [0.5, 1.0, 2.0], 10**4, seed=99)
        assert len(table.rows) == 3
        for row in table.rows:
            assert row.slack > 0
            assert row.satisfied

    def test_singleton_reproduces_single_estimate(self):
        table = sweep("phi", NORMAL, 0.0, [1.0], 10**4, seed=123)
        est = estimate_phi_errors(NORMAL, HYP, 10**4, seed=row_seed(123, 1.0))
        row = table.rows[0]
        assert row.alpha_hat == est.alpha_hat
        assert row.beta_hat == est.beta_hat

    def test_reordering_permutes_rows_only(self):
        fwd = sweep("phi", NORMAL, 0.0, [0.5, 1.0, 2.0], 5000, seed=7)
        rev = sweep("phi", NORMAL, 0.0, [2.0, 1.0, 0.5], 5000, seed=7)
        key = lambda r: r.theta1
        assert sorted(fwd.rows, key=key) == sorted(rev.rows, key=key)

    def test_psi_sweep(self):
        em = make_two_stage_normal(1, 1, 1.0)
        table = sweep("psi", em, 0.0, [1.0, 2.0], 10**4, seed=4)
        for row in table.rows:
            assert row.satisfied

    def test_exponential_rows_respect_bound(self):
        fam = make_exponential_rate()
        table = sweep("phi", fam, 1.0, [1.5, 2.0, 4.0], 10**4, seed=21)
        for row in table.rows:
            assert row.satisfied

    def test_input_validation(self):
        with pytest.raises(ValueError):
            sweep("phi", NORMAL, 0.0, [], 1000, seed=0)
        with pytest.raises(ValueError):
            sweep("chi", NORMAL, 0.0, [1.0], 1000, seed=0)
        with pytest.raises(ValueError):
            sweep("psi", NORMAL, 0.0, [1.0], 1000, seed=0)
