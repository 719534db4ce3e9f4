"""Gibbs sampler tying the conjugate, shadow-rate, SV and SSVS blocks together.

One iteration updates, in order:

1. shadow values of censored cells (ELB models),
2. the design matrices from the completed data,
3. SSVS indicators and the resulting prior row variances,
4. SV mixture indicators, log-variance paths and innovation variances,
5. coefficients and covariance (joint NIW draw without SV, equation-wise
   weighted draw with SV).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bvar, elb, ssvs, sv
from .config import ModelSpec, SamplerConfig, retained_count, validate
from .data import Dataset
from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class Draw:
    """One retained Gibbs state. Optional fields are ``None`` when the
    corresponding model feature is off."""

    B: np.ndarray
    Sigma: np.ndarray | None = None
    h: np.ndarray | None = None
    sigma2_eta: np.ndarray | None = None
    shadow: np.ndarray | None = None
    gamma: np.ndarray | None = None


@dataclass(frozen=True)
class PosteriorResult:
    draws: tuple[Draw, ...]
    model: ModelSpec
    prior: bvar.NiwPrior
    sampler: SamplerConfig
    dataset: Dataset
    diagnostics: dict = field(default_factory=dict)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.dataset.variables

    def stack(self, name: str) -> np.ndarray:
        """Stack one field across draws along a new leading axis."""
        if not self.draws:
            raise ValidationError("posterior result has no draws")
        if name not in Draw.__dataclass_fields__:
            raise ValidationError(f"unknown draw field {name!r}")
        values = [getattr(d, name) for d in self.draws]
        if values[0] is None:
            raise ValidationError(f"field {name!r} is not available for this model")
        return np.stack(values)

    def completed(self, i: int) -> np.ndarray:
        """Completed (shadow-augmented) data behind draw ``i``."""
        d = self.draws[i]
        return d.shadow if d.shadow is not None else np.asarray(self.dataset.values)


class GibbsChain:
    """Mutable state of a single chain; :func:`fit` is the public entry point."""

    def __init__(self, ds: Dataset, model: ModelSpec, prior: bvar.NiwPrior,
                 rng: np.random.Generator):
        self.ds = ds
        self.model = model
        self.prior = prior
        self.rng = rng
        self.p = model.p
        self.intercept = model.include_intercept
        self.table = sv.ksc_mixture_table()
        self.scale = prior.sigma_scale()
        self.baseline_v = np.diag(prior.V0).copy()
        self.diagnostics = {"iterations": 0, "mixture_fallbacks": 0}

        if model.elb is not None:
            self.latent = elb.initial_state(ds, model.elb)
            self.presample = elb.presample_prior(ds, model.elb)
        else:
            self.latent = elb.LatentState(np.array(ds.values), np.zeros(ds.values.shape, dtype=bool))
        self.design = bvar.build_design(self.latent.completed, self.p, self.intercept)
        T_eff, N = self.design.Y.shape

        self.gamma = np.ones(prior.K, dtype=np.int8) if model.ssvs is not None else None
        self.current_prior = self._prior_for_gamma()
        self.vol = None
        if model.sv_enabled:
            self.vol = sv.VolState(
                h=np.tile(np.log(self.scale), (T_eff, 1)),
                sigma2_eta=np.full(N, model.volatility.innovation_prior_scale
                                   / (model.volatility.innovation_prior_shape + 1)),
                indicators=np.zeros((T_eff, N), dtype=int),
                h0=np.log(self.scale),
            )
        self.block = "initial draw"
        self.B, self.Sigma = bvar.sample_niw(bvar.niw_posterior(self.current_prior, self.design), rng)

    def _prior_for_gamma(self) -> bvar.NiwPrior:
        if self.gamma is None:
            return self.prior
        v = ssvs.effective_row_variance(self.gamma, self.baseline_v, self.model.ssvs)
        return self.prior.with_row_variances(v)

    def precisions(self) -> np.ndarray:
        if self.vol is not None:
            return elb.precisions_from_logvol(self.vol.h)
        return elb.precisions_from_sigma(self.Sigma, self.design.T_eff)

    def step(self):
        rng = self.rng
        model = self.model
        if model.elb is not None:
            self.block = "shadow rates"
            self.latent = elb.sample_shadow_rates(
                self.latent, self.B, self.precisions(), model.elb.bound, self.p, self.intercept, rng,
                self.presample,
            )
            self.design = bvar.build_design(self.latent.completed, self.p, self.intercept)
        if model.ssvs is not None:
            self.block = "ssvs"
            sigma_diag = self.scale if self.vol is not None else np.diag(self.Sigma)
            state = ssvs.sample_inclusion(self.B, self.prior.M0, self.baseline_v, sigma_diag,
                                          model.ssvs, rng, self.intercept)
            self.gamma = state.gamma
            self.current_prior = self._prior_for_gamma()
        if self.vol is not None:
            self.block = "stochastic volatility"
            self._sv_step()
            self.block = "coefficients"
            self.B = bvar.draw_coefficients_heteroskedastic(
                self.current_prior, self.design, self.vol.h, self.scale, rng
            )
        else:
            self.block = "coefficients"
            post = bvar.niw_posterior(self.current_prior, self.design)
            self.B, self.Sigma = bvar.sample_niw(post, rng)
        self.diagnostics["iterations"] += 1

    def _sv_step(self):
        resid = self.design.Y - self.design.X @ self.B
        self.diagnostics["mixture_fallbacks"] += sv.update_volatility(
            resid, self.vol, self.model.volatility, self.table, self.rng
        )

    def snapshot(self) -> Draw:
        return Draw(
            B=self.B.copy(),
            Sigma=None if self.vol is not None else self.Sigma.copy(),
            h=None if self.vol is None else self.vol.h.copy(),
            sigma2_eta=None if self.vol is None else self.vol.sigma2_eta.copy(),
            shadow=self.latent.completed.copy() if self.model.elb is not None else None,
            gamma=None if self.gamma is None else self.gamma.copy(),
        )


def _check_prior(model: ModelSpec, prior: bvar.NiwPrior, N: int):
    K = (1 if model.include_intercept else 0) + N * model.p
    if prior.K != K or prior.N != N:
        raise ValidationError(f"prior has K={prior.K}, N={prior.N}; model needs K={K}, N={N}")


def fit(ds: Dataset, model: ModelSpec, prior: bvar.NiwPrior, cfg: SamplerConfig,
        rng: np.random.Generator | None = None) -> PosteriorResult:
    """Run the Gibbs sampler and return the retained draws.

    ``cfg.draws`` counts all iterations; the first ``cfg.burn_in`` are
    discarded and every ``cfg.thin``-th of the rest is kept. All randomness
    comes from ``rng`` (default: ``numpy.random.default_rng(cfg.seed)``).
    """
    validate(model, ds)
    _check_prior(model, prior, ds.N)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    try:
        chain = GibbsChain(ds, model, prior, rng)
    except NumericalError as exc:
        raise NumericalError(f"initialization: {exc}") from exc
    kept = []
    for it in range(cfg.draws):
        try:
            chain.step()
        except (NumericalError, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"iteration {it}, block {chain.block!r}: {exc}") from exc
        if it >= cfg.burn_in and (it - cfg.burn_in + 1) % cfg.thin == 0:
            kept.append(chain.snapshot())
    assert len(kept) == retained_count(cfg)
    return PosteriorResult(tuple(kept), model, prior, cfg, ds, dict(chain.diagnostics))


@dataclass(frozen=True)
class Summary:
    mean: np.ndarray
    sd: np.ndarray
    probs: tuple[float, ...]
    quantiles: np.ndarray


_SELECTORS = {"B": "B", "Sigma": "Sigma", "shadow": "shadow", "h": "h", "gamma": "gamma",
              "sigma2_eta": "sigma2_eta"}


def posterior_summary(result: PosteriorResult, quantity: str,
                      probs: Sequence[float] = (0.1, 0.5, 0.9)) -> Summary:
    """Mean, standard deviation and quantiles of one quantity across draws.

    ``quantity`` is one of ``B``, ``Sigma``, ``shadow``, ``h``, ``gamma``
    or ``sigma2_eta``. For ``gamma`` the mean is the inclusion frequency.
    """
    if quantity not in _SELECTORS:
        raise ValidationError(f"unknown quantity {quantity!r}; expected one of {sorted(_SELECTORS)}")
    x = result.stack(_SELECTORS[quantity]).astype(float)
    probs = tuple(float(q) for q in probs)
    return Summary(x.mean(axis=0), x.std(axis=0), probs, np.quantile(x, probs, axis=0))
