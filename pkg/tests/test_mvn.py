"""Equicorrelated row model: simulation moments, likelihoods, scores."""

import math

import numpy as np
import pytest
from scipy import stats

from pairsaddle import DomainError, MvnModel, MvnParams, RngStream
from pairsaddle.inference import fit_mple
from pairsaddle.models.mvn import (
    mvn_full_loglik,
    mvn_full_mle,
    mvn_unit_score,
    pl_mvn,
    rho_lower,
    simulate_equicorr,
)

from conftest import MVN_THETA
from helpers import fd_gradient


def _pair_density_oracle(params, rows):
    """Sum of exact bivariate normal log densities over all coordinate pairs."""
    cov = params.sigma2 * np.array([[1.0, params.rho], [params.rho, 1.0]])
    mean = np.array([params.mu, params.mu])
    total = 0.0
    q = rows.shape[1]
    for j in range(q):
        for k in range(j + 1, q):
            total += stats.multivariate_normal.logpdf(rows[:, [j, k]], mean, cov).sum()
    return total


class TestParams:
    def test_domain_enforced(self):
        with pytest.raises(DomainError):
            MvnParams(0.0, -1.0, 0.0, 4)
        with pytest.raises(DomainError):
            MvnParams(0.0, 1.0, 1.0, 4)
        with pytest.raises(DomainError):
            MvnParams(0.0, 1.0, -0.5, 4)  # below -1/(q-1) for q=4

    def test_rho_lower(self):
        assert rho_lower(4) == pytest.approx(-1.0 / 3.0)
        assert rho_lower(2) == pytest.approx(-1.0)


class TestSimulate:
    def test_independent_case_covariance(self):
        params = MvnParams(0.0, 1.0, 0.0, 4)
        rows = simulate_equicorr(params, 100_000, RngStream(21).child(0))
        sample_cov = np.cov(rows.T)
        np.testing.assert_allclose(sample_cov, np.eye(4), atol=0.02)

    def test_high_correlation(self):
        params = MvnParams(0.0, 1.0, 0.9, 5)
        rows = simulate_equicorr(params, 100_000, RngStream(22).child(0))
        corr = np.corrcoef(rows.T)
        off = corr[np.triu_indices(5, 1)]
        assert off.mean() == pytest.approx(0.9, abs=0.01)

    def test_row_mean_variance(self):
        q, rho = 6, 0.3
        params = MvnParams(0.0, 1.0, rho, q)
        rows = simulate_equicorr(params, 200_000, RngStream(23).child(0))
        means = rows.mean(axis=1)
        target = (1.0 + (q - 1) * rho) / q
        assert means.mean() == pytest.approx(0.0, abs=0.01)
        assert means.var() == pytest.approx(target, rel=0.03)

    def test_mean_and_scale_applied(self):
        params = MvnParams(5.0, 4.0, 0.2, 3)
        rows = simulate_equicorr(params, 50_000, RngStream(24).child(0))
        assert rows.mean() == pytest.approx(5.0, abs=0.05)
        assert rows.var() == pytest.approx(4.0, rel=0.05)

    def test_empty_sample_rejected(self):
        with pytest.raises(DomainError):
            simulate_equicorr(MvnParams(0.0, 1.0, 0.0, 3), 0, RngStream(25).child(0))


class TestPairwiseLoglik:
    def test_zero_case(self):
        assert pl_mvn(MvnParams(0.0, 1.0, 0.0, 2), [[0.0, 0.0]]) == pytest.approx(
            0.0, abs=1e-14
        )

    def test_hand_value(self):
        assert pl_mvn(MvnParams(0.0, 1.0, 0.0, 2), [[1.0, -1.0]]) == pytest.approx(
            -1.0, abs=1e-14
        )

    def test_pair_density_oracle(self):
        gen = np.random.default_rng(26)
        rows = gen.standard_normal((7, 5))
        params = MvnParams(0.3, 1.7, 0.45, 5)
        n, q = rows.shape
        constant = n * (q * (q - 1) / 2) * math.log(2.0 * math.pi)
        assert pl_mvn(params, rows) == pytest.approx(
            _pair_density_oracle(params, rows) + constant, abs=1e-8
        )

    def test_permutation_invariance(self):
        gen = np.random.default_rng(27)
        rows = gen.standard_normal((6, 5))
        params = MvnParams(0.1, 1.2, 0.3, 5)
        base = pl_mvn(params, rows)
        for _ in range(5):
            perm = gen.permutation(5)
            assert pl_mvn(params, rows[:, perm]) == pytest.approx(base, abs=1e-10)

    def test_width_one_rejected(self):
        with pytest.raises(DomainError):
            pl_mvn(MvnParams(0.0, 1.0, 0.0, 1), [[1.0]])


class TestUnitScore:
    def test_matches_finite_differences(self):
        gen = np.random.default_rng(28)
        rows = gen.standard_normal((4, 4)) + 0.5
        params = MvnParams(0.4, 0.9, 0.25, 4)
        for i in range(4):
            analytic = mvn_unit_score(params, rows, i)
            numeric = fd_gradient(
                lambda t: pl_mvn(MvnParams(t[0], t[1], t[2], 4), rows[i : i + 1]),
                params.theta,
            )
            np.testing.assert_allclose(analytic, numeric, atol=1e-5)

    def test_mu_component_vanishes_at_centered_row(self):
        params = MvnParams(2.0, 1.0, 0.3, 4)
        row = np.full((1, 4), 2.0)
        assert mvn_unit_score(params, row, 0)[0] == pytest.approx(0.0, abs=1e-12)

    def test_scores_sum_to_zero_at_fit(self, mvn_model, mvn_data):
        units = mvn_model.units(mvn_data)
        fit = fit_mple(mvn_model, units)
        params = MvnParams(*fit.theta_hat, mvn_model.q)
        total = sum(mvn_unit_score(params, mvn_data, i) for i in range(units.shape[0]))
        assert np.abs(total).max() <= 1e-6 * units.shape[0]

    def test_index_bounds(self):
        params = MvnParams(0.0, 1.0, 0.0, 3)
        rows = np.zeros((2, 3))
        with pytest.raises(DomainError):
            mvn_unit_score(params, rows, 2)
        with pytest.raises(DomainError):
            mvn_unit_score(params, rows, -1)


class TestFullLoglik:
    def test_width_one_reduction(self):
        y = np.array([[0.5], [-1.0], [2.0]])
        params = MvnParams(0.3, 1.5, 0.0, 1)
        expected = stats.norm.logpdf(y.ravel(), 0.3, math.sqrt(1.5)).sum()
        assert mvn_full_loglik(params, y) == pytest.approx(expected, abs=1e-10)

    def test_zero_matrix_case(self):
        q, n = 4, 3
        params = MvnParams(0.0, 2.0, 0.5, q)
        logdet = (
            q * math.log(2.0) + (q - 1) * math.log(0.5) + math.log(1 + (q - 1) * 0.5)
        )
        expected = -0.5 * n * (q * math.log(2 * math.pi) + logdet)
        assert mvn_full_loglik(params, np.zeros((n, q))) == pytest.approx(
            expected, abs=1e-10
        )

    def test_generic_mvn_oracle(self):
        gen = np.random.default_rng(29)
        rows = gen.standard_normal((6, 5)) * 1.3 + 0.2
        params = MvnParams(0.2, 1.6, 0.35, 5)
        cov = params.sigma2 * (
            (1 - params.rho) * np.eye(5) + params.rho * np.ones((5, 5))
        )
        expected = stats.multivariate_normal.logpdf(
            rows, np.full(5, params.mu), cov
        ).sum()
        assert mvn_full_loglik(params, rows) == pytest.approx(expected, abs=1e-8)

    def test_pairwise_equals_full_for_width_two(self):
        gen = np.random.default_rng(30)
        rows = gen.standard_normal((8, 2))
        diffs = []
        for theta in (
            (0.0, 1.0, 0.0),
            (0.5, 2.0, 0.4),
            (-0.3, 0.7, -0.6),
            (1.0, 1.5, 0.85),
        ):
            params = MvnParams(*theta, 2)
            diffs.append(pl_mvn(params, rows) - mvn_full_loglik(params, rows))
        # pairwise = full likelihood at q=2 up to the dropped constant
        assert max(diffs) - min(diffs) <= 1e-8


class TestFullMle:
    def test_mu_is_grand_mean(self):
        gen = np.random.default_rng(31)
        rows = gen.standard_normal((12, 4)) + 1.7
        assert mvn_full_mle(rows).mu == pytest.approx(rows.mean(), abs=1e-12)

    def test_is_local_maximum(self):
        model = MvnModel(q=4)
        rows = model.simulate(MVN_THETA, 60, RngStream(32).child(0))
        mle = mvn_full_mle(rows)
        best = mvn_full_loglik(mle, rows)
        for bump in np.eye(3) * 1e-3:
            shifted = MvnParams(*(mle.theta + bump), 4)
            assert mvn_full_loglik(shifted, rows) <= best + 1e-9

    def test_constant_rows_stay_in_domain(self):
        rows = np.ones((5, 3))
        mle = mvn_full_mle(rows)
        assert rho_lower(3) < mle.rho < 1.0
        assert mle.sigma2 > 0


class TestMvnModel:
    def test_width_validation(self):
        with pytest.raises(DomainError):
            MvnModel(q=1)
        with pytest.raises(DomainError):
            MvnModel(q=2.5)

    def test_default_start_is_full_mle(self, mvn_model, mvn_data):
        np.testing.assert_allclose(
            mvn_model.default_start(mvn_model.units(mvn_data)),
            mvn_full_mle(mvn_data).theta,
        )

    def test_full_hooks(self, mvn_model, mvn_data):
        assert mvn_model.has_full_loglik
        theta_full = mvn_model.fit_full(mvn_data)
        assert mvn_model.full_loglik(theta_full, mvn_data) >= mvn_model.full_loglik(
            MVN_THETA, mvn_data
        )

    def test_wrong_width_data_rejected(self, mvn_model):
        with pytest.raises(DomainError):
            mvn_model.units(np.zeros((3, 5)))
        with pytest.raises(DomainError):
            mvn_model.units(np.array([[0.0, np.inf, 0.0, 0.0]]))
