"""Row-wise spike-and-slab variable selection.

Every predictor row of ``B`` has one indicator shared by all equations.
An included row gets prior variance ``c1**2 * v``, an excluded one
``c0**2 * v``, where ``v`` is the row's Minnesota baseline variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .config import SsvsSpec


@dataclass(frozen=True)
class InclusionState:
    gamma: np.ndarray
    baseline_v: np.ndarray


def effective_row_variance(gamma_k, baseline, spec: SsvsSpec):
    mult = np.where(np.asarray(gamma_k, dtype=bool), spec.slab_multiplier, spec.spike_multiplier)
    out = mult ** 2 * np.asarray(baseline, dtype=float)
    return float(out) if out.ndim == 0 else out


def _log_normal(x, mean, var):
    return -0.5 * (np.log(2 * np.pi * var) + (x - mean) ** 2 / var)


def inclusion_log_odds(B, M0, baseline_v, Sigma_diag, spec: SsvsSpec) -> np.ndarray:
    """Posterior log-odds of inclusion for each row, conditional on ``B``."""
    v = np.asarray(baseline_v, dtype=float)[:, None] * np.asarray(Sigma_diag, dtype=float)[None, :]
    slab = _log_normal(B, M0, spec.slab_multiplier ** 2 * v)
    spike = _log_normal(B, M0, spec.spike_multiplier ** 2 * v)
    prior = np.log(spec.prior_inclusion) - np.log1p(-spec.prior_inclusion)
    return prior + (slab - spike).sum(axis=1)


def sample_inclusion(B, M0, baseline_v, Sigma_diag, spec: SsvsSpec, rng: np.random.Generator,
                     include_intercept: bool = True) -> InclusionState:
    """Bernoulli draw of each row indicator given the current coefficients.

    The intercept row (row 0 when ``include_intercept``) stays included when
    ``spec.force_intercept`` is set.
    """
    prob = special.expit(inclusion_log_odds(B, M0, baseline_v, Sigma_diag, spec))
    u = rng.uniform(size=prob.size)
    gamma = (u < prob).astype(np.int8)
    if include_intercept and spec.force_intercept:
        gamma[0] = 1
    return InclusionState(gamma, np.asarray(baseline_v, dtype=float))
