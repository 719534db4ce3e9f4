"""Diagonal stochastic volatility via the Kim-Shephard-Chib mixture sampler.

Each residual series is linearized as ``log(e**2 + c) = h + z`` where ``z``
follows the log-chi-square(1) law, approximated by a seven-component normal
mixture. The stored component means already include the -1.2704 shift
(the mean of log chi-square(1)), so the linearized observation must not be
shifted again.

The log-variance path ``h`` is a random walk with ``h_1 ~ N(h0_mean, h0_var)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NumericalError

_KSC_Q = (0.00730, 0.10556, 0.00002, 0.04395, 0.34001, 0.24566, 0.25750)
_KSC_M = (-10.12999, -3.97281, -8.56686, 2.77786, 0.61942, 1.79518, -1.08819)
_KSC_V2 = (5.79596, 2.61369, 5.17950, 0.16735, 0.64009, 0.34023, 1.26261)
LOG_CHI2_MEAN_SHIFT = 1.2704


@dataclass(frozen=True)
class MixtureTable:
    q: np.ndarray
    m: np.ndarray
    v2: np.ndarray


@dataclass
class VolState:
    """Current SV block: log-variances, innovation variances, mixture indicators.

    ``indicators`` are zero-based component indices (0..6).
    """

    h: np.ndarray
    sigma2_eta: np.ndarray
    indicators: np.ndarray
    h0: np.ndarray


def ksc_mixture_table() -> MixtureTable:
    return MixtureTable(
        np.array(_KSC_Q),
        np.array(_KSC_M) - LOG_CHI2_MEAN_SHIFT,
        np.array(_KSC_V2),
    )


def linearize(residual, h=None, offset: float = 1e-4):
    """``log(residual**2 + offset)``; ``h`` is unused and kept for call symmetry."""
    return np.log(np.square(residual) + offset)


def mixture_log_weights(ystar, h, table: MixtureTable) -> np.ndarray:
    r = np.asarray(ystar, dtype=float)[..., None] - np.asarray(h, dtype=float)[..., None] - table.m
    return np.log(table.q) - 0.5 * np.log(2 * np.pi * table.v2) - 0.5 * r * r / table.v2


def mixture_probabilities(ystar, h, table: MixtureTable):
    """Posterior component probabilities, shape ``(..., 7)``.

    Returns the probabilities and a boolean array marking entries whose
    densities all underflowed, which fall back to the prior weights.
    """
    logw = mixture_log_weights(ystar, h, table)
    top = logw.max(axis=-1, keepdims=True)
    bad = ~np.isfinite(top[..., 0])
    w = np.exp(logw - np.where(np.isfinite(top), top, 0.0))
    total = w.sum(axis=-1, keepdims=True)
    bad |= ~(total[..., 0] > 0)
    probs = np.where(bad[..., None], table.q, w / np.where(total > 0, total, 1.0))
    return probs, bad


def sample_mixture_indicators(ystar, h, table: MixtureTable, rng: np.random.Generator,
                              return_fallbacks: bool = False):
    probs, bad = mixture_probabilities(ystar, h, table)
    cdf = np.cumsum(probs, axis=-1)
    u = rng.uniform(size=probs.shape[:-1])
    s = (u[..., None] > cdf).sum(axis=-1)
    s = np.minimum(s, len(table.q) - 1)
    if return_fallbacks:
        return s, int(bad.sum())
    return s


def logvol_precision_bands(indicators, sigma2_eta: float, h0_var: float, table: MixtureTable):
    """Lower banded form (2 x T) of the tridiagonal posterior precision of ``h``."""
    obs_prec = 1.0 / table.v2[indicators]
    T = obs_prec.size
    rw = np.full(T, 2.0 / sigma2_eta)
    rw[-1] = 1.0 / sigma2_eta
    rw[0] = 1.0 / h0_var + (1.0 / sigma2_eta if T > 1 else 0.0)
    bands = np.zeros((2, T))
    bands[0] = obs_prec + rw
    bands[1, :-1] = -1.0 / sigma2_eta
    return bands


def _banded_cholesky(indicators, sigma2_eta, h0_var, table):
    bands = logvol_precision_bands(indicators, sigma2_eta, h0_var, table)
    try:
        return linalg.cholesky_banded(bands, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError("log-volatility precision is not positive definite") from exc


def logvol_posterior_mean(ystar, indicators, sigma2_eta, h0_mean, h0_var, table):
    cb = _banded_cholesky(indicators, sigma2_eta, h0_var, table)
    rhs = _logvol_rhs(ystar, indicators, h0_mean, h0_var, table)
    return linalg.cho_solve_banded((cb, True), rhs)


def _logvol_rhs(ystar, indicators, h0_mean, h0_var, table):
    rhs = (np.asarray(ystar, dtype=float) - table.m[indicators]) / table.v2[indicators]
    rhs[0] += h0_mean / h0_var
    return rhs


def sample_log_volatility(ystar, indicators, sigma2_eta: float, h0_mean: float, h0_var: float,
                          table: MixtureTable, rng: np.random.Generator) -> np.ndarray:
    """Draw the whole log-variance path from its Gaussian conditional.

    The precision is tridiagonal, so factorization and both solves are O(T).
    """
    cb = _banded_cholesky(indicators, sigma2_eta, h0_var, table)
    rhs = _logvol_rhs(ystar, indicators, h0_mean, h0_var, table)
    mean = linalg.cho_solve_banded((cb, True), rhs)
    # L' x = z with L' upper bidiagonal
    upper = np.zeros_like(cb)
    upper[0, 1:] = cb[1, :-1]
    upper[1] = cb[0]
    z = rng.standard_normal(mean.size)
    return mean + linalg.solve_banded((0, 1), upper, z)


def sample_innovation_variance(h, h0: float, prior_shape: float, prior_scale: float,
                               rng: np.random.Generator) -> float:
    """Inverse-gamma draw of the random-walk innovation variance."""
    h = np.asarray(h, dtype=float)
    inc = np.diff(np.concatenate([[h0], h]))
    shape = prior_shape + h.size / 2
    scale = prior_scale + 0.5 * inc @ inc
    return float(scale / rng.gamma(shape))


def update_volatility(resid: np.ndarray, vol: VolState, spec, table: MixtureTable,
                      rng: np.random.Generator) -> int:
    """One SV pass per column: indicators, then ``h``, then the innovation variance.

    ``spec`` is a :class:`~srvar.config.VolatilitySpec`. Updates ``vol`` in
    place and returns the number of mixture-probability underflow fallbacks.
    """
    ystar = linearize(resid, offset=spec.log_offset)
    fallbacks = 0
    for i in range(resid.shape[1]):
        s, bad = sample_mixture_indicators(ystar[:, i], vol.h[:, i], table, rng, return_fallbacks=True)
        fallbacks += bad
        vol.indicators[:, i] = s
        vol.h[:, i] = sample_log_volatility(ystar[:, i], s, vol.sigma2_eta[i], vol.h0[i],
                                            spec.initial_logvol_variance, table, rng)
        vol.sigma2_eta[i] = sample_innovation_variance(vol.h[:, i], vol.h0[i], spec.innovation_prior_shape,
                                                       spec.innovation_prior_scale, rng)
    if not np.all(np.isfinite(vol.h)):
        raise NumericalError("log-volatility path became non-finite")
    return fallbacks
