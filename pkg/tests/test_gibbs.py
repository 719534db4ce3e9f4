import numpy as np
import pytest

from scenarios import diffuse_prior, geweke_z, recovery_fit, sparse_inclusion
from srvar.bvar import minnesota_prior
from srvar.config import ElbSpec, ModelSpec, SamplerConfig, SsvsSpec, VolatilitySpec
from srvar.data import Dataset, simulate_demo
from srvar.errors import ValidationError
from srvar.gibbs import Draw, PosteriorResult, fit, posterior_summary


def _plain(p=2):
    return ModelSpec(p=p, volatility=VolatilitySpec(enabled=False))


@pytest.fixture(scope="module")
def var_data():
    rng = np.random.default_rng(0)
    y = np.cumsum(rng.normal(0, 0.3, (80, 2)), axis=0) * 0.2 + rng.normal(0, 1, (80, 2))
    return Dataset.from_arrays(y, ["a", "b"])


@pytest.fixture(scope="module")
def demo():
    ds, truth = simulate_demo(200, seed=7)
    model = ModelSpec(p=2, elb=ElbSpec(["rate"]), volatility=VolatilitySpec(enabled=True), ssvs=SsvsSpec())
    res = fit(ds, model, minnesota_prior(2, ds), SamplerConfig(draws=600, burn_in=200, thin=2, seed=3))
    return res, truth


class TestFit:
    def test_default_sampler_settings_plain(self, var_data):
        res = fit(var_data, _plain(), minnesota_prior(2, var_data), SamplerConfig(2000, 500, 2, seed=1))
        assert len(res.draws) == 750
        for d in res.draws[:5] + res.draws[-5:]:
            assert d.Sigma is not None and d.h is None and d.sigma2_eta is None
            assert d.shadow is None and d.gamma is None
            assert d.B.shape == (5, 2)
        assert res.diagnostics["iterations"] == 2000

    def test_deterministic(self, var_data):
        cfg = SamplerConfig(50, 10, 1, seed=4)
        a = fit(var_data, _plain(), minnesota_prior(2, var_data), cfg)
        b = fit(var_data, _plain(), minnesota_prior(2, var_data), cfg)
        np.testing.assert_array_equal(a.stack("B"), b.stack("B"))
        np.testing.assert_array_equal(a.stack("Sigma"), b.stack("Sigma"))

    def test_injected_rng_overrides_seed(self, var_data):
        cfg = SamplerConfig(20, seed=4)
        prior = minnesota_prior(2, var_data)
        a = fit(var_data, _plain(), prior, cfg, rng=np.random.default_rng(99))
        b = fit(var_data, _plain(), prior, cfg, rng=np.random.default_rng(99))
        c = fit(var_data, _plain(), prior, cfg)
        np.testing.assert_array_equal(a.stack("B"), b.stack("B"))
        assert not np.array_equal(a.stack("B"), c.stack("B"))

    def test_thinning_count(self, var_data):
        res = fit(var_data, _plain(), minnesota_prior(2, var_data), SamplerConfig(31, 10, 4))
        assert len(res.draws) == 5

    def test_no_elb_completed_is_observed(self, var_data):
        model = ModelSpec(p=2, volatility=VolatilitySpec(enabled=True))
        res = fit(var_data, model, minnesota_prior(2, var_data), SamplerConfig(20))
        for i in range(len(res.draws)):
            np.testing.assert_array_equal(res.completed(i), var_data.values)
        d = res.draws[0]
        assert d.Sigma is None and d.h.shape == (78, 2) and d.sigma2_eta.shape == (2,)

    def test_prior_dimension_mismatch(self, var_data):
        with pytest.raises(ValidationError, match="prior"):
            fit(var_data, _plain(p=1), minnesota_prior(2, var_data), SamplerConfig(5))

    def test_validation_runs_first(self):
        ds = Dataset.from_arrays(np.zeros((15, 1)) + np.arange(15)[:, None], ["x"])
        with pytest.raises(ValidationError, match="too short"):
            fit(ds, _plain(p=4), diffuse_prior(1, 5), SamplerConfig(5))

    def test_parameter_recovery(self):
        res, B = recovery_fit(seed=0)
        lo, hi = np.quantile(res.stack("B"), [0.005, 0.995], axis=0)
        assert np.all((B >= lo) & (B <= hi))


class TestDemoFit:
    def test_feature_fields(self, demo):
        res, _ = demo
        d = res.draws[0]
        assert d.Sigma is None and d.h is not None and d.gamma is not None and d.shadow is not None
        assert all(dr.gamma[0] == 1 for dr in res.draws)

    def test_shadow_draws_respect_bound(self, demo):
        res, _ = demo
        mask = np.asarray(res.dataset.values[:, 0]) <= 0.125 + 1e-6
        sh = res.stack("shadow")
        assert np.all(sh[:, mask, 0] <= 0.125)
        np.testing.assert_array_equal(sh[:, ~mask, 0], np.broadcast_to(res.dataset.values[~mask, 0], sh[:, ~mask, 0].shape))
        np.testing.assert_array_equal(sh[:, :, 1], np.broadcast_to(res.dataset.values[:, 1], sh[:, :, 1].shape))

    def test_deep_latent_periods_sit_below_bound(self, demo):
        res, truth = demo
        mask = np.asarray(res.dataset.values[:, 0]) <= 0.125 + 1e-6
        deep = mask & (truth.shadow_path < 0.125 - 0.5)
        assert deep.sum() > 5
        med = posterior_summary(res, "shadow").quantiles[1][:, 0]
        assert np.all(med[deep] < 0.125)

    def test_diagnostics(self, demo):
        res, _ = demo
        assert res.diagnostics["iterations"] == 600
        assert res.diagnostics["mixture_fallbacks"] >= 0


class TestSummary:
    def _const_result(self, var_data, n=4):
        d = Draw(B=np.arange(10.0).reshape(5, 2), Sigma=np.eye(2), gamma=np.array([1, 0, 1, 1, 0], np.int8))
        return PosteriorResult((d,) * n, _plain(), minnesota_prior(2, var_data), SamplerConfig(max(n, 1)), var_data)

    def test_constant_draws_zero_sd(self, var_data):
        s = posterior_summary(self._const_result(var_data), "B")
        assert np.all(s.sd == 0)
        np.testing.assert_array_equal(s.mean, np.arange(10.0).reshape(5, 2))
        assert s.quantiles.shape == (3, 5, 2)

    def test_gamma_frequencies(self, var_data, demo):
        s = posterior_summary(demo[0], "gamma")
        assert np.all((s.mean >= 0) & (s.mean <= 1))
        np.testing.assert_array_equal(posterior_summary(self._const_result(var_data), "gamma").mean,
                                      [1, 0, 1, 1, 0])

    def test_shadow_median_below_bound(self, demo):
        res, _ = demo
        mask = np.asarray(res.dataset.values[:, 0]) <= 0.125 + 1e-6
        s = posterior_summary(res, "shadow", probs=(0.5,))
        assert np.all(s.quantiles[0][mask, 0] <= 0.125)

    def test_errors(self, var_data):
        with pytest.raises(ValidationError, match="unknown quantity"):
            posterior_summary(self._const_result(var_data), "beta")
        with pytest.raises(ValidationError, match="not available"):
            posterior_summary(self._const_result(var_data), "h")
        empty = self._const_result(var_data, n=0)
        with pytest.raises(ValidationError, match="no draws"):
            posterior_summary(empty, "B")


def test_ssvs_separates_sparse_rows():
    freq, nonzero = sparse_inclusion(seed=1, draws=800, burn_in=200)
    assert freq[nonzero].mean() - freq[~nonzero].mean() >= 0.2


def test_geweke_short():
    z = geweke_z(n=5_000, seed=2)
    assert np.all(np.abs(z) < 3)
