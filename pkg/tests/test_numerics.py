"""Numeric kernel: factorizations, Newton solver, chi-square helpers, RNG."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairsaddle.errors import (
    DomainError,
    NoConvergence,
    NotPositiveDefinite,
    SingularJacobian,
)
from pairsaddle.numerics import (
    RngStream,
    as_generator,
    categorical_sample,
    central_jacobian,
    chisq_quantile,
    chisq_tail,
    cholesky_spd,
    h_inv_j_eigenvalues,
    log_sum_exp,
    newton_system,
    solve_spd,
)


class TestCholeskySpd:
    def test_identity(self):
        np.testing.assert_allclose(cholesky_spd(np.eye(3)), np.eye(3), atol=1e-14)

    def test_hand_factorization(self):
        lower = cholesky_spd(np.array([[4.0, 2.0], [2.0, 3.0]]))
        expected = np.array([[2.0, 0.0], [1.0, math.sqrt(2.0)]])
        np.testing.assert_allclose(lower, expected, atol=1e-12)

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_reconstruction_random_spd(self):
        gen = np.random.default_rng(0)
        for _ in range(20):
            root = gen.standard_normal((4, 4))
            a = root @ root.T + 0.5 * np.eye(4)
            lower = cholesky_spd(a)
            assert np.tril(lower) == pytest.approx(lower)
            np.testing.assert_allclose(
                lower @ lower.T, a, atol=1e-10 * np.abs(a).max()
            )

    def test_non_square_rejected(self):
        with pytest.raises(DomainError):
            cholesky_spd(np.ones((2, 3)))

    def test_solve_spd_residual(self):
        gen = np.random.default_rng(1)
        for _ in range(10):
            root = gen.standard_normal((5, 5))
            a = root @ root.T + np.eye(5)
            b = gen.standard_normal(5)
            x = solve_spd(a, b)
            resid = np.abs(a @ x - b).max()
            assert resid <= 1e-8 * max(np.abs(b).max(), 1.0)


class TestHInvJEigenvalues:
    def test_identity_sensitivity(self):
        eigs = h_inv_j_eigenvalues(np.diag([2.0, 3.0]), np.eye(2))
        np.testing.assert_allclose(eigs, [2.0, 3.0], atol=1e-12)

    def test_equal_matrices_give_ones(self):
        a = np.array([[2.0, 0.5], [0.5, 1.0]])
        np.testing.assert_allclose(h_inv_j_eigenvalues(a, a), [1.0, 1.0], atol=1e-12)

    def test_hand_eigendecomposition(self):
        j = np.array([[2.0, 1.0], [1.0, 2.0]])
        eigs = h_inv_j_eigenvalues(j, 2.0 * np.eye(2))
        np.testing.assert_allclose(eigs, [0.5, 1.5], atol=1e-12)

    def test_sorted_and_nonnegative_for_psd(self):
        gen = np.random.default_rng(2)
        for _ in range(20):
            half = gen.standard_normal((6, 3))
            j = half.T @ half / 6  # PSD, possibly near-singular
            root = gen.standard_normal((3, 3))
            h = root @ root.T + 0.5 * np.eye(3)
            eigs = h_inv_j_eigenvalues(j, h)
            assert np.all(np.diff(eigs) >= 0)
            assert np.all(eigs >= -1e-10)

    def test_congruence_invariance(self):
        gen = np.random.default_rng(3)
        j = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 0.5]])
        h = np.array([[1.5, 0.2, 0.1], [0.2, 1.1, 0.0], [0.1, 0.0, 0.9]])
        base = h_inv_j_eigenvalues(j, h)
        for _ in range(10):
            m = gen.standard_normal((3, 3)) + 2.0 * np.eye(3)
            mapped = h_inv_j_eigenvalues(m.T @ j @ m, m.T @ h @ m)
            np.testing.assert_allclose(mapped, base, rtol=1e-8, atol=1e-8)

    def test_singular_h_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            h_inv_j_eigenvalues(np.eye(2), np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestNewtonSystem:
    def test_affine_one_step(self):
        target = np.array([3.0, -1.0])
        result = newton_system(lambda x: x - target, np.zeros(2))
        np.testing.assert_allclose(result.x, target, atol=1e-9)
        assert result.iterations == 1
        assert result.residual_norm <= 1e-9

    def test_two_point_tilt_equation(self):
        # stationarity of the tilted family on scores {-1, 2}
        def f(beta):
            return np.array([-math.exp(-beta[0]) + 2.0 * math.exp(2.0 * beta[0])])

        result = newton_system(f, np.zeros(1))
        np.testing.assert_allclose(result.x, [-math.log(2.0) / 3.0], atol=1e-9)

    def test_analytic_jacobian_matches_numeric_path(self):
        def f(x):
            return np.array([math.exp(x[0]) - 2.0])

        def jac(x):
            return np.array([[math.exp(x[0])]])

        with_jac = newton_system(f, np.zeros(1), jacobian=jac)
        without = newton_system(f, np.zeros(1))
        np.testing.assert_allclose(with_jac.x, without.x, atol=1e-8)
        np.testing.assert_allclose(with_jac.x, [math.log(2.0)], atol=1e-9)

    def test_no_real_root(self):
        with pytest.raises(NoConvergence) as excinfo:
            newton_system(lambda x: x * x + 1.0, np.array([0.5]))
        # the best iterate is reported; its residual cannot beat the infimum
        assert excinfo.value.best.residual_norm >= 1.0

    def test_singular_jacobian(self):
        with pytest.raises(SingularJacobian):
            newton_system(
                lambda x: x - 1.0, np.zeros(2), jacobian=lambda x: np.zeros((2, 2))
            )

    def test_divergence_guard(self):
        # root at 1e6; the guard refuses to travel there
        with pytest.raises(NoConvergence):
            newton_system(
                lambda x: x - 1e6,
                np.zeros(1),
                guard=lambda x: bool(np.abs(x).max() > 1e3),
            )

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DomainError):
            newton_system(lambda x: np.array([x[0]]), np.zeros(2))

    def test_nonfinite_start_rejected(self):
        with pytest.raises(DomainError):
            newton_system(lambda x: np.full_like(x, np.inf), np.ones(1))


class TestCentralJacobian:
    def test_linear_map_exact(self):
        a = np.array([[1.0, 2.0, 0.5], [0.0, -1.0, 3.0]])
        jac = central_jacobian(lambda x: a @ x, np.array([0.3, -0.7, 1.1]))
        np.testing.assert_allclose(jac, a, atol=1e-8)

    def test_hand_derivative(self):
        jac = central_jacobian(
            lambda x: np.array([x[0] ** 2, x[0] * x[1]]), np.array([1.0, 2.0])
        )
        np.testing.assert_allclose(jac, [[2.0, 0.0], [2.0, 1.0]], atol=1e-8)

    def test_constant_map(self):
        jac = central_jacobian(lambda x: np.array([5.0]), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(jac, np.zeros((1, 3)), atol=1e-14)

    def test_rectangular_shape(self):
        jac = central_jacobian(lambda x: np.array([x[0], x[1], x[0] + x[1]]), np.zeros(2))
        assert jac.shape == (3, 2)

    def test_cubic_truncation_error(self):
        # error is O(h^2) with the curvature constant of the third derivative
        jac = central_jacobian(lambda x: np.array([x[0] ** 3]), np.array([1.0]))
        assert jac[0, 0] == pytest.approx(3.0, abs=1e-8)


class TestChisq:
    def test_tail_at_zero(self):
        assert chisq_tail(0.0, 3) == pytest.approx(1.0, abs=1e-12)

    def test_tail_standard_quantile(self):
        assert chisq_tail(7.8147, 3) == pytest.approx(0.05, abs=1e-4)

    def test_tail_limit(self):
        assert chisq_tail(1e4, 3) < 1e-12

    def test_tail_monotone(self):
        xs = np.linspace(0.0, 30.0, 50)
        tails = [chisq_tail(x, 2) for x in xs]
        assert np.all(np.diff(tails) <= 0)

    def test_tail_domain(self):
        with pytest.raises(DomainError):
            chisq_tail(-0.1, 3)
        with pytest.raises(DomainError):
            chisq_tail(1.0, 0)
        with pytest.raises(DomainError):
            chisq_tail(1.0, 1.5)

    def test_quantile_roundtrip(self):
        for df in (1, 2, 3, 7):
            for prob in (0.05, 0.5, 0.9, 0.95, 0.99):
                x = chisq_quantile(prob, df)
                assert chisq_tail(x, df) == pytest.approx(1.0 - prob, abs=1e-10)

    def test_quantile_known_value(self):
        assert chisq_quantile(0.95, 3) == pytest.approx(7.8147, abs=1e-3)

    def test_quantile_domain(self):
        with pytest.raises(DomainError):
            chisq_quantile(1.0, 3)
        with pytest.raises(DomainError):
            chisq_quantile(-0.01, 3)
        with pytest.raises(DomainError):
            chisq_quantile(0.5, 0)


class TestLogSumExp:
    def test_pair_of_zeros(self):
        assert log_sum_exp(np.zeros(2)) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_direct_evaluation(self):
        assert log_sum_exp(np.array([0.0, math.log(3.0)])) == pytest.approx(
            math.log(4.0), abs=1e-12
        )

    def test_large_arguments_no_overflow(self):
        assert log_sum_exp(np.array([1000.0, 1000.0])) == pytest.approx(
            1000.0 + math.log(2.0), abs=1e-12
        )

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            log_sum_exp(np.array([]))

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=8),
        st.floats(-200, 200),
    )
    def test_shift_invariance(self, values, shift):
        values = np.asarray(values)
        lhs = log_sum_exp(values + shift)
        rhs = log_sum_exp(values) + shift
        assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(rhs)))


class TestCategoricalSample:
    def test_point_mass_first(self):
        stream = RngStream(7)
        for b in range(20):
            assert categorical_sample(np.array([1.0, 0.0, 0.0]), stream.child(b)) == 0

    def test_point_mass_last(self):
        stream = RngStream(8)
        for b in range(20):
            assert categorical_sample(np.array([0.0, 0.0, 1.0]), stream.child(b)) == 2

    def test_uniform_frequencies(self):
        draws = categorical_sample(np.full(4, 0.25), RngStream(9).child(0), size=100_000)
        for k in range(4):
            assert (draws == k).mean() == pytest.approx(0.25, abs=0.005)

    def test_deterministic_for_equal_streams(self):
        w = np.array([0.5, 0.5])
        a = categorical_sample(w, RngStream(10).child(3), size=50)
        b = categorical_sample(w, RngStream(10).child(3), size=50)
        np.testing.assert_array_equal(a, b)

    def test_scalar_and_vector_forms(self):
        w = np.array([0.2, 0.3, 0.5])
        single = categorical_sample(w, RngStream(11).child(0))
        assert isinstance(single, (int, np.integer))
        many = categorical_sample(w, RngStream(11).child(0), size=17)
        assert many.shape == (17,)
        assert many.min() >= 0 and many.max() <= 2

    def test_invalid_weights_rejected(self):
        stream = RngStream(12).child(0)
        with pytest.raises(DomainError):
            categorical_sample(np.array([0.5, -0.5, 1.0]), stream)
        with pytest.raises(DomainError):
            categorical_sample(np.array([0.5, 0.4]), stream)
        with pytest.raises(DomainError):
            categorical_sample(np.array([]), stream)
        with pytest.raises(DomainError):
            categorical_sample(np.array([np.nan, 1.0]), stream)


class TestRngStream:
    def test_equal_fields_identical_draws(self):
        a = RngStream(42, 3, (1, 2)).generator().standard_normal(8)
        b = RngStream(42, 3, (1, 2)).generator().standard_normal(8)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(42, 0).generator().standard_normal(8)
        b = RngStream(42, 1).generator().standard_normal(8)
        assert not np.allclose(a, b)

    def test_child_extends_path(self):
        parent = RngStream(5, 1, (4,))
        child = parent.child(9)
        assert child == RngStream(5, 1, (4, 9))
        assert child != parent

    def test_generator_restarts(self):
        stream = RngStream(13).child(2)
        first = stream.generator().standard_normal(4)
        second = stream.generator().standard_normal(4)
        np.testing.assert_array_equal(first, second)

    def test_frozen(self):
        stream = RngStream(1)
        with pytest.raises(dataclasses.FrozenInstanceError):
            stream.master_seed = 2

    def test_as_generator(self):
        gen = np.random.default_rng(0)
        assert as_generator(gen) is gen
        assert isinstance(as_generator(RngStream(1)), np.random.Generator)
        with pytest.raises(DomainError):
            as_generator(12345)
