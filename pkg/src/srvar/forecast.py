"""Predictive simulation from retained posterior draws.

Paths iterate the latent (shadow) VAR; ELB variables are censored at the
bound only when reporting the observed series. Path ``d`` uses posterior
draw ``d mod R`` (cycling in order, wrapping around).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .gibbs import PosteriorResult

DEFAULT_PROBS = (0.10, 0.50, 0.90)


@dataclass(frozen=True)
class ForecastResult:
    horizons: tuple[int, ...]
    shadow_draws: np.ndarray
    observed_draws: np.ndarray
    draw_index: np.ndarray
    variables: tuple[str, ...]
    elb_variables: tuple[str, ...] = ()
    bound: float | None = None


def spectral_radius(B: np.ndarray, p: int, include_intercept: bool) -> float:
    N = B.shape[1]
    off = 1 if include_intercept else 0
    comp = np.zeros((N * p, N * p))
    comp[:N] = B[off:].T
    comp[N:, : N * (p - 1)] = np.eye(N * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def _assign_draws(result: PosteriorResult, D: int, reject_explosive: bool) -> np.ndarray:
    R = len(result.draws)
    usable = np.arange(R)
    if reject_explosive:
        m = result.model
        usable = np.array([i for i in range(R)
                           if spectral_radius(result.draws[i].B, m.p, m.include_intercept) < 1.0],
                          dtype=int)
        if usable.size == 0:
            raise ValidationError("every posterior draw is explosive; cannot forecast")
    return usable[np.arange(D) % usable.size]


def forecast(result: PosteriorResult, horizons: Sequence[int] = (1, 4, 8), draws: int = 500,
             rng: np.random.Generator | None = None, *, reject_explosive: bool = False,
             zero_shocks: bool = False) -> ForecastResult:
    """Simulate ``draws`` predictive paths up to ``max(horizons)`` steps ahead.

    Shocks are ``N(0, Sigma)`` without SV; with SV each log-variance keeps
    following its random walk past the sample end. ``zero_shocks`` switches
    all shocks off and exists for testing.
    """
    if not result.draws:
        raise ValidationError("posterior result has no draws")
    horizons = tuple(int(h) for h in horizons)
    if not horizons or min(horizons) < 1:
        raise ValidationError(f"horizons must be nonempty positive integers, got {horizons}")
    if draws < 1:
        raise ValidationError("forecast draws must be >= 1")
    if rng is None:
        rng = np.random.default_rng(result.sampler.seed)
    model = result.model
    p, off = model.p, (1 if model.include_intercept else 0)
    N = result.dataset.N
    H = max(horizons)
    idx = _assign_draws(result, draws, reject_explosive)

    B = np.stack([result.draws[i].B for i in idx])  # D x K x N
    lags = np.stack([result.completed(i)[-p:][::-1] for i in idx])  # D x p x N, newest first
    z = rng.standard_normal((draws, H, N))
    if model.sv_enabled:
        xi = rng.standard_normal((draws, H, N))
        h_last = np.stack([result.draws[i].h[-1] for i in idx])
        s_eta = np.sqrt(np.stack([result.draws[i].sigma2_eta for i in idx]))
        h_path = h_last[:, None, :] + np.cumsum(xi * s_eta[:, None, :], axis=1)
        shocks = np.exp(h_path / 2) * z
    else:
        chol = np.linalg.cholesky(np.stack([result.draws[i].Sigma for i in idx]))
        shocks = np.einsum("dij,dhj->dhi", chol, z)
    if zero_shocks:
        shocks = np.zeros_like(shocks)

    paths = np.empty((draws, H, N))
    for step in range(H):
        x = lags.reshape(draws, p * N)
        mean = np.einsum("dk,dkn->dn", x, B[:, off:])
        if off:
            mean += B[:, 0]
        y = mean + shocks[:, step]
        paths[:, step] = y
        lags = np.concatenate([y[:, None, :], lags[:, :-1]], axis=1)

    observed = paths.copy()
    elb_vars: tuple[str, ...] = ()
    bound = None
    if model.elb is not None:
        elb_vars = model.elb.applies_to
        bound = model.elb.bound
        for name in elb_vars:
            j = result.dataset.column(name)
            observed[:, :, j] = np.maximum(paths[:, :, j], bound)
    return ForecastResult(horizons, paths, observed, idx, result.variables, elb_vars, bound)


def quantiles(fc: ForecastResult, probs: Sequence[float] = DEFAULT_PROBS,
              series: str = "observed") -> np.ndarray:
    """Empirical quantiles, shape ``(len(horizons), N, len(probs))``."""
    probs = tuple(float(q) for q in probs)
    if not probs:
        raise ValidationError("probs must be nonempty")
    if any(not 0 < q < 1 for q in probs):
        raise ValidationError(f"probabilities must lie in (0, 1), got {probs}")
    if series == "observed":
        x = fc.observed_draws
    elif series == "shadow":
        x = fc.shadow_draws
    else:
        raise ValidationError(f"series must be 'shadow' or 'observed', got {series!r}")
    rows = x[:, [h - 1 for h in fc.horizons]]
    q = np.quantile(rows, probs, axis=0, method="linear")  # P x H x N
    return np.moveaxis(q, 0, -1)
