"""Shadow-rate data augmentation for variables censored at a lower bound.

The latent VAR runs on shadow values; an observation at (or within a small
tolerance of) the bound only says the shadow value is <= bound. Censored
cells are refreshed one at a time from their truncated-normal full
conditionals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .config import ElbSpec
from .data import Dataset
from .errors import NumericalError, ValidationError

# below this standardized bound inverse-CDF sampling loses accuracy
_TAIL_SWITCH = -8.0


@dataclass(frozen=True)
class LatentState:
    """Completed data (shadow values in censored cells) plus the censoring mask."""

    completed: np.ndarray
    mask: np.ndarray

    @property
    def cells(self) -> list[tuple[int, int]]:
        return [tuple(c) for c in np.argwhere(self.mask)]


def censored_cells(ds: Dataset, spec: ElbSpec) -> np.ndarray:
    """Boolean T x N mask of cells treated as censored."""
    mask = np.zeros(ds.values.shape, dtype=bool)
    for name in spec.applies_to:
        j = ds.column(name)
        mask[:, j] = ds.values[:, j] <= spec.bound + spec.censor_tolerance
    return mask


def initial_state(ds: Dataset, spec: ElbSpec) -> LatentState:
    mask = censored_cells(ds, spec)
    completed = np.array(ds.values)
    completed[mask] = np.minimum(completed[mask], spec.bound)
    return LatentState(completed, mask)


def _tail_sample(a, rng):
    # draws w >= a > 0 from a standard normal tail: exponential proposal, rate (a + sqrt(a^2+4))/2
    alpha = (a + np.sqrt(a * a + 4.0)) / 2.0
    while True:
        w = a + rng.exponential(1.0 / alpha)
        if rng.uniform() <= np.exp(-0.5 * (w - alpha) ** 2):
            return w


def sample_truncated_normal_upper(mean, sd, upper, rng: np.random.Generator):
    """Draw from ``N(mean, sd**2)`` restricted to ``(-inf, upper]``.

    Inputs broadcast; a scalar draw is returned as ``float``. Inverse-CDF on
    the standardized scale, switching to exponential rejection in the far
    tail (standardized bound below -8).
    """
    mean, sd, upper = np.broadcast_arrays(
        np.asarray(mean, dtype=float), np.asarray(sd, dtype=float), np.asarray(upper, dtype=float)
    )
    if np.any(~(sd > 0)):
        raise ValidationError("truncated normal needs sd > 0")
    b = (upper - mean) / sd
    u = rng.uniform(size=b.shape)
    z = special.ndtri(u * special.ndtr(b))
    tail = b < _TAIL_SWITCH
    if np.any(tail):
        z = np.array(z)
        for idx in map(tuple, np.argwhere(tail)):
            z[idx] = -_tail_sample(-b[idx], rng)
    x = np.minimum(mean + sd * z, upper)
    return float(x) if x.ndim == 0 else x


def _residual(completed, s, B, p, off):
    y = completed[s]
    x = completed[s - p : s][::-1].ravel()
    fitted = x @ B[off:]
    if off:
        fitted = fitted + B[0]
    return y - fitted


def shadow_conditional(t: int, j: int, state: LatentState, B: np.ndarray,
                       precisions: np.ndarray, p: int, include_intercept: bool = True,
                       presample_prior=None):
    """Mean and variance of the full conditional of cell ``(t, j)``.

    ``precisions`` has shape ``(T - p, N, N)``: the error precision of the
    VAR equation system at each in-sample time (``Sigma^-1`` repeated, or
    ``diag(exp(-h_t))`` under stochastic volatility). The cell enters the
    time-``t`` residual as a response (when ``t >= p``) and the residuals at
    ``t + l`` as a lag-``l`` regressor; each term is linear in the cell.

    ``presample_prior`` is an optional ``(mean, var)`` pair of N-vectors
    added as a Gaussian prior term for cells in the first ``p`` rows.
    """
    if not state.mask[t, j]:
        raise ValidationError(f"cell ({t}, {j}) is not censored")
    completed = state.completed
    T, N = completed.shape
    off = 1 if include_intercept else 0
    x_cur = completed[t, j]
    prec = 0.0
    lin = 0.0
    for lag in range(0, p + 1):
        s = t + lag
        if s < p or s >= T:
            continue
        if lag == 0:
            a = np.zeros(N)
            a[j] = 1.0
        else:
            a = -B[off + (lag - 1) * N + j]
        e0 = _residual(completed, s, B, p, off) - a * x_cur
        Q = precisions[s - p]
        Qa = Q @ a
        prec += a @ Qa
        lin -= e0 @ Qa
    if t < p and presample_prior is not None:
        m0, v0 = presample_prior
        prec += 1.0 / v0[j]
        lin += m0[j] / v0[j]
    if not prec > 0:
        raise NumericalError(f"shadow cell ({t}, {j}) has no likelihood information")
    return lin / prec, 1.0 / prec


def sample_shadow_rates(state: LatentState, B: np.ndarray, precisions: np.ndarray, bound: float,
                        p: int, include_intercept: bool, rng: np.random.Generator,
                        presample_prior=None) -> LatentState:
    """One single-site Gibbs sweep over censored cells in row-major order."""
    if not state.mask.any():
        return state
    new = LatentState(state.completed.copy(), state.mask)
    for t, j in np.argwhere(state.mask):
        mean, var = shadow_conditional(t, j, new, B, precisions, p, include_intercept, presample_prior)
        new.completed[t, j] = sample_truncated_normal_upper(mean, np.sqrt(var), bound, rng)
    return new


def precisions_from_sigma(Sigma: np.ndarray, T_eff: int) -> np.ndarray:
    Q = np.linalg.inv(Sigma)
    Q = (Q + Q.T) / 2
    return np.broadcast_to(Q, (T_eff,) + Q.shape)


def precisions_from_logvol(h: np.ndarray) -> np.ndarray:
    T_eff, N = h.shape
    out = np.zeros((T_eff, N, N))
    out[:, np.arange(N), np.arange(N)] = np.exp(-h)
    return out


def presample_prior(ds: Dataset, spec: ElbSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-variable ``(mean, var)`` of the weak prior on pre-sample shadow cells."""
    v = np.var(np.asarray(ds.values), axis=0, ddof=1) if ds.T > 1 else np.ones(ds.N)
    v = np.where(v > 0, v, 1.0)
    return np.full(ds.N, spec.bound), spec.presample_scale * v
