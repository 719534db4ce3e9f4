import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from oracles import niw_dense, rel_err
from srvar.bvar import (DesignMatrices, MinnesotaHyper, NiwPrior, ar_residual_variances, build_design,
                        draw_coefficients_heteroskedastic, heteroskedastic_moments,
                        minnesota_prior, minnesota_row_variances, niw_posterior, row_labels,
                        sample_inverse_wishart, sample_matrix_normal)
from srvar.data import Dataset
from srvar.errors import NumericalError, ValidationError


def _random_spd(rng, n, jitter=0.5):
    A = rng.standard_normal((n, n))
    return A @ A.T + jitter * np.eye(n)


def _random_instance(rng, N=None, K=None, T=None):
    N = N or rng.integers(1, 4)
    K = K or rng.integers(1, 8)
    T = T or rng.integers(1, 41)
    M0 = rng.standard_normal((K, N))
    V0 = _random_spd(rng, K)
    S0 = _random_spd(rng, N)
    X = rng.standard_normal((T, K))
    Y = rng.standard_normal((T, N))
    return NiwPrior(M0, V0, float(N + 1 + rng.uniform(0, 3)), S0), X, Y


def _design(X, Y):
    return DesignMatrices(Y, X, 1, False)


class TestDesign:
    def test_univariate_example(self):
        d = build_design(Dataset.from_arrays([[1.0], [2.0], [3.0]], ["y"]), 1, True)
        np.testing.assert_array_equal(d.Y, [[2.0], [3.0]])
        np.testing.assert_array_equal(d.X, [[1.0, 1.0], [1.0, 2.0]])

    @pytest.mark.parametrize("N, p, intercept, K", [(2, 2, True, 5), (3, 4, True, 13), (3, 4, False, 12)])
    def test_K(self, N, p, intercept, K):
        d = build_design(np.random.default_rng(0).standard_normal((20, N)), p, intercept)
        assert d.K == K and d.T_eff == 20 - p

    def test_lag_major_order(self):
        y = np.arange(12.0).reshape(6, 2)
        d = build_design(y, 2, True)
        # row for t=2: [1, y_1, y_0]
        np.testing.assert_array_equal(d.X[0], [1, 2, 3, 0, 1])
        assert row_labels(["a", "b"], 2, True) == ["const", "a.L1", "b.L1", "a.L2", "b.L2"]

    def test_too_short(self):
        with pytest.raises(ValidationError):
            build_design(np.zeros((2, 1)), 2)


class TestArResidualVariances:
    def test_white_noise(self):
        y = np.random.default_rng(1).standard_normal((5000, 1))
        s2 = ar_residual_variances(y, 2)
        assert abs(s2[0] - 1.0) < 0.1

    def test_constant_column_floored(self):
        y = np.column_stack([np.ones(50), np.random.default_rng(0).standard_normal(50)])
        with pytest.warns(RuntimeWarning):
            s2 = ar_residual_variances(y, 1)
        assert s2[0] == 1e-12 and s2[1] > 0.1

    def test_perfect_ar1_floored(self):
        y = 0.5 ** np.arange(30)[:, None]
        with pytest.warns(RuntimeWarning):
            assert ar_residual_variances(y, 1)[0] == 1e-12

    def test_needs_length(self):
        with pytest.raises(ValidationError):
            ar_residual_variances(np.zeros((3, 1)), 1)


class TestMinnesota:
    def test_hand_example(self):
        # N=2, p=2, lambda1=1, lambda3=1, residual variances (1, 4)
        v = minnesota_row_variances(2, np.array([1.0, 4.0]), MinnesotaHyper(1.0, 1.0))
        expected = (1.0 / (1.0 * 2 ** 1 * 4.0 ** 0.5)) ** 2
        assert v[4] == pytest.approx(expected, rel=1e-15)
        assert expected == 1 / 16
        assert v[0] == 100.0 ** 2

    def test_lambda3_zero_flat(self):
        v = minnesota_row_variances(4, np.array([2.0]), MinnesotaHyper(0.5, 0.0), include_intercept=False)
        assert np.all(v == v[0])

    def test_doubling_lambda1(self):
        s2 = np.array([0.3, 2.0, 5.0])
        a = minnesota_row_variances(3, s2, MinnesotaHyper(0.7, 1.0))
        b = minnesota_row_variances(3, s2, MinnesotaHyper(1.4, 1.0))
        np.testing.assert_allclose(b[1:], a[1:] / 4, rtol=1e-14)
        assert a[0] == b[0]

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, 10), st.floats(0.01, 3), st.floats(1e-3, 10))
    def test_monotone(self, lam1, lam3, s2):
        v = minnesota_row_variances(5, np.array([s2]), MinnesotaHyper(lam1, lam3), include_intercept=False)
        assert np.all(np.diff(v) < 0)
        w = minnesota_row_variances(5, np.array([s2]), MinnesotaHyper(lam1 * 1.5, lam3), include_intercept=False)
        assert np.all(w < v)

    def test_prior_structure(self):
        rng = np.random.default_rng(3)
        y = rng.standard_normal((80, 3))
        prior = minnesota_prior(2, y, MinnesotaHyper(1.0, 1.0))
        assert prior.K == 7 and prior.N == 3
        assert prior.nu0 == 5
        expected_M0 = np.zeros((7, 3))
        expected_M0[1, 0] = expected_M0[2, 1] = expected_M0[3, 2] = 1.0
        np.testing.assert_array_equal(prior.M0, expected_M0)
        s2 = ar_residual_variances(y, 2)
        np.testing.assert_allclose(np.diag(prior.S0), s2)
        np.testing.assert_allclose(prior.sigma_scale(), s2)
        assert np.count_nonzero(prior.V0 - np.diag(np.diag(prior.V0))) == 0


class TestNiwPosterior:
    def test_scalar_example(self):
        prior = NiwPrior(np.zeros((1, 1)), np.eye(1), 3.0, np.array([[0.7]]))
        post = niw_posterior(prior, _design(np.array([[1.0]]), np.array([[2.0]])))
        assert post.Vn[0, 0] == pytest.approx(0.5, rel=1e-14)
        assert post.Mn[0, 0] == pytest.approx(1.0, rel=1e-14)
        assert post.Sn[0, 0] == pytest.approx(2.7, rel=1e-14)
        assert post.nun == 4.0

    def test_empty_design_is_prior(self):
        prior, _, _ = _random_instance(np.random.default_rng(0), N=2, K=3, T=1)
        post = niw_posterior(prior, _design(np.empty((0, 3)), np.empty((0, 2))))
        np.testing.assert_array_equal(post.Mn, prior.M0)
        np.testing.assert_array_equal(post.Vn, prior.V0)
        np.testing.assert_array_equal(post.Sn, prior.S0)
        assert post.nun == prior.nu0

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            prior, X, Y = _random_instance(rng)
            post = niw_posterior(prior, _design(X, Y))
            Mn, Vn, nun, Sn = niw_dense(prior.M0, prior.V0, prior.nu0, prior.S0, X, Y)
            assert rel_err(post.Mn, Mn) < 1e-10
            assert rel_err(post.Vn, Vn) < 1e-10
            assert rel_err(post.Sn, Sn) < 1e-10
            assert post.nun == nun

    def test_split_data_coherence(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            prior, X, Y = _random_instance(rng, T=30)
            k = int(rng.integers(1, 29))
            one = niw_posterior(prior, _design(X, Y))
            first = niw_posterior(prior, _design(X[:k], Y[:k]))
            chained = NiwPrior(first.Mn, first.Vn, first.nun, first.Sn)
            two = niw_posterior(chained, _design(X[k:], Y[k:]))
            for a, b in [(two.Mn, one.Mn), (two.Vn, one.Vn), (two.Sn, one.Sn)]:
                assert rel_err(a, b) < 1e-8
            assert two.nun == pytest.approx(one.nun, rel=1e-14)

    def test_diffuse_prior_is_ols(self):
        rng = np.random.default_rng(5)
        X = np.column_stack([np.ones(200), rng.standard_normal((200, 3))])
        Y = X @ rng.standard_normal((4, 2)) + rng.standard_normal((200, 2))
        prior = NiwPrior(np.zeros((4, 2)), 1e8 * np.eye(4), 4.0, np.eye(2))
        post = niw_posterior(prior, _design(X, Y))
        ols = np.linalg.lstsq(X, Y, rcond=None)[0]
        assert rel_err(post.Mn, ols) < 1e-4

    def test_non_spd_prior_rejected(self):
        with pytest.raises(NumericalError, match="V0"):
            NiwPrior(np.zeros((2, 1)), np.array([[1.0, 2.0], [2.0, 1.0]]), 2.0, np.eye(1))


class TestInverseWishart:
    def test_scalar_mean(self):
        rng = np.random.default_rng(11)
        nu, S = 7.0, np.array([[2.5]])
        draws = np.array([sample_inverse_wishart(nu, S, rng)[0, 0] for _ in range(100_000)])
        assert draws.mean() == pytest.approx(2.5 / (nu - 2), rel=0.03)

    def test_matrix_mean(self):
        rng = np.random.default_rng(12)
        S = np.array([[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 0.5]])
        nu = 12.0
        draws = np.stack([sample_inverse_wishart(nu, S, rng) for _ in range(20_000)])
        np.testing.assert_allclose(draws.mean(axis=0), S / (nu - 3 - 1), atol=0.02)

    def test_spd_and_deterministic(self):
        S = np.array([[1.0, 0.3], [0.3, 0.5]])
        a = [sample_inverse_wishart(3.5, S, np.random.default_rng(1)) for _ in range(2)]
        np.testing.assert_array_equal(a[0], a[1])
        rng = np.random.default_rng(2)
        for _ in range(200):
            Sig = sample_inverse_wishart(2.5, S, rng)
            np.testing.assert_array_equal(Sig, Sig.T)
            assert np.all(np.linalg.eigvalsh(Sig) > 0)

    def test_bad_nu(self):
        with pytest.raises(ValidationError):
            sample_inverse_wishart(0.5, np.eye(2), np.random.default_rng(0))


class TestMatrixNormal:
    def test_zero_probe(self):
        M = np.arange(6.0).reshape(3, 2)
        out = sample_matrix_normal(M, np.eye(3) * 2, np.eye(2), np.random.default_rng(0), z=np.zeros((3, 2)))
        np.testing.assert_array_equal(out, M)

    def test_kronecker_covariance(self):
        rng = np.random.default_rng(21)
        V = np.array([[2.0, 0.3], [0.3, 0.5]])
        Sigma = np.array([[1.5, -0.4], [-0.4, 0.8]])
        M = np.zeros((2, 2))
        draws = np.stack([sample_matrix_normal(M, V, Sigma, rng) for _ in range(100_000)])
        assert draws[:, 0, 0].var() == pytest.approx(V[0, 0] * Sigma[0, 0], rel=0.05)
        cov_01_10 = np.mean(draws[:, 0, 1] * draws[:, 1, 0])
        assert cov_01_10 == pytest.approx(V[0, 1] * Sigma[1, 0], abs=0.01)

    def test_scalar_is_standard_normal(self):
        rng = np.random.default_rng(22)
        x = np.array([sample_matrix_normal(np.zeros((1, 1)), np.eye(1), np.eye(1), rng)[0, 0]
                      for _ in range(20_000)])
        assert stats.kstest(x, "norm").pvalue > 0.01


class TestHeteroskedastic:
    def _setup(self, rng, T=60, K=4, N=2):
        X = np.column_stack([np.ones(T), rng.standard_normal((T, K - 1))])
        Y = rng.standard_normal((T, N))
        prior = NiwPrior(rng.standard_normal((K, N)), _random_spd(rng, K), N + 2.0, np.eye(N))
        return prior, _design(X, Y)

    def test_h_zero_is_ridge(self):
        rng = np.random.default_rng(31)
        prior, d = self._setup(rng)
        means, _ = heteroskedastic_moments(prior, d, np.zeros_like(d.Y), np.ones(2))
        V0i = np.linalg.inv(prior.V0)
        ridge = np.linalg.inv(V0i + d.X.T @ d.X) @ (V0i @ prior.M0 + d.X.T @ d.Y)
        np.testing.assert_allclose(means, ridge, rtol=1e-10)

    def test_constant_shift_diffuse(self):
        rng = np.random.default_rng(32)
        prior, d = self._setup(rng)
        diffuse = NiwPrior(prior.M0, np.eye(prior.K) * 1e8, prior.nu0, prior.S0)
        m0, f0 = heteroskedastic_moments(diffuse, d, np.zeros_like(d.Y), np.ones(2))
        m1, f1 = heteroskedastic_moments(diffuse, d, np.full_like(d.Y, 1.3), np.ones(2))
        np.testing.assert_allclose(m1, m0, rtol=1e-6)
        # precision scales by exp(-1.3) so the Cholesky factor by exp(-0.65)
        np.testing.assert_allclose(f1[0], f0[0] * np.exp(-0.65), rtol=1e-6)

    def test_draw_deterministic_and_dispersion(self):
        rng = np.random.default_rng(33)
        prior, d = self._setup(rng)
        h = rng.standard_normal(d.Y.shape) * 0.3
        a = draw_coefficients_heteroskedastic(prior, d, h, np.ones(2), np.random.default_rng(5))
        b = draw_coefficients_heteroskedastic(prior, d, h, np.ones(2), np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)
        means, factors = heteroskedastic_moments(prior, d, h, np.ones(2))
        draws = np.stack([draw_coefficients_heteroskedastic(prior, d, h, np.ones(2), rng)
                          for _ in range(4000)])
        cov = np.linalg.inv(factors[1] @ factors[1].T)
        np.testing.assert_allclose(np.cov(draws[:, :, 1].T), cov, atol=0.1 * np.max(np.diag(cov)))
        np.testing.assert_allclose(draws.mean(axis=0), means, atol=0.1)

    def test_shape_mismatch(self):
        rng = np.random.default_rng(34)
        prior, d = self._setup(rng)
        with pytest.raises(ValidationError):
            heteroskedastic_moments(prior, d, np.zeros((3, 2)), np.ones(2))
