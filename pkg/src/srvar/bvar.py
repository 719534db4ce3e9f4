"""Design matrices, Minnesota prior and Normal-inverse-Wishart updates.

Coefficients are stored as a K x N matrix ``B`` with one column per
equation. Row order is ``[const?, y1.L1, ..., yN.L1, y1.L2, ..., yN.Lp]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .data import Dataset
from .errors import NumericalError, ValidationError

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class DesignMatrices:
    Y: np.ndarray
    X: np.ndarray
    p: int
    include_intercept: bool

    @property
    def T_eff(self) -> int:
        return self.Y.shape[0]

    @property
    def K(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class NiwPrior:
    """Matrix-normal inverse-Wishart prior ``B | Sigma ~ MN(M0, V0, Sigma)``,
    ``Sigma ~ IW(nu0, S0)``."""

    M0: np.ndarray
    V0: np.ndarray
    nu0: float
    S0: np.ndarray

    def __post_init__(self):
        K, N = self.M0.shape
        if self.V0.shape != (K, K) or self.S0.shape != (N, N):
            raise ValidationError(
                f"prior shapes disagree: M0 {self.M0.shape}, V0 {self.V0.shape}, S0 {self.S0.shape}"
            )
        if not self.nu0 > N - 1:
            raise ValidationError(f"nu0 must exceed N - 1 = {N - 1}, got {self.nu0}")
        _cholesky(self.V0, "V0")
        _cholesky(self.S0, "S0")

    @property
    def K(self) -> int:
        return self.M0.shape[0]

    @property
    def N(self) -> int:
        return self.M0.shape[1]

    def sigma_scale(self) -> np.ndarray:
        """Per-variable residual variance implied by the prior (mean of diag Sigma)."""
        N = self.N
        denom = self.nu0 - N - 1 if self.nu0 > N + 1 else self.nu0
        return np.diag(self.S0) / denom

    def with_row_variances(self, v: np.ndarray) -> "NiwPrior":
        return NiwPrior(self.M0, np.diag(v), self.nu0, self.S0)


@dataclass(frozen=True)
class NiwPosterior:
    Mn: np.ndarray
    Vn: np.ndarray
    nun: float
    Sn: np.ndarray


@dataclass(frozen=True)
class MinnesotaHyper:
    """Minnesota hyperparameters.

    ``lambda1`` is an inverse scale: larger values tighten every lag
    coefficient towards its prior mean. ``lambda3`` sets the lag decay.
    """

    lambda1: float = 1.0
    lambda3: float = 1.0
    own_lag_mean: float = 1.0
    intercept_scale: float = 100.0

    def __post_init__(self):
        if not self.lambda1 > 0:
            raise ValidationError("lambda1 must be positive")
        if not self.lambda3 >= 0:
            raise ValidationError("lambda3 must be nonnegative")


def _cholesky(A: np.ndarray, name: str) -> np.ndarray:
    try:
        return linalg.cholesky(A, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"{name} is not symmetric positive definite") from exc


def _cho_factor(A: np.ndarray, name: str):
    try:
        return linalg.cho_factor(A, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"{name} is not symmetric positive definite") from exc


def lag_matrix(values: np.ndarray, p: int, include_intercept: bool) -> np.ndarray:
    T, N = values.shape
    T_eff = T - p
    blocks = [values[p - l : T - l] for l in range(1, p + 1)]
    X = np.hstack(blocks) if blocks else np.empty((T_eff, 0))
    if include_intercept:
        X = np.hstack([np.ones((T_eff, 1)), X])
    return X


def build_design(ds: Dataset | np.ndarray, p: int, include_intercept: bool = True) -> DesignMatrices:
    values = ds.values if isinstance(ds, Dataset) else np.asarray(ds, dtype=float)
    if values.shape[0] <= p:
        raise ValidationError(f"need T > p for a design matrix, got T={values.shape[0]}, p={p}")
    X = lag_matrix(values, p, include_intercept)
    return DesignMatrices(values[p:].copy(), X, p, include_intercept)


def row_labels(variables, p: int, include_intercept: bool) -> list[str]:
    labels = ["const"] if include_intercept else []
    labels += [f"{v}.L{l}" for l in range(1, p + 1) for v in variables]
    return labels


def ar_residual_variances(ds: Dataset | np.ndarray, p: int) -> np.ndarray:
    """Residual variance of a univariate AR(p) with intercept, per column.

    Degenerate columns (constant or perfectly fitted) return ``1e-12`` and
    emit a :class:`RuntimeWarning`.
    """
    values = ds.values if isinstance(ds, Dataset) else np.asarray(ds, dtype=float)
    T, N = values.shape
    if T <= p + 2:
        raise ValidationError(f"AR({p}) residual variances need T > p + 2, got T={T}")
    T_eff = T - p
    dof = T_eff - p - 1
    if dof < 1:
        raise ValidationError(f"AR({p}) regression has no residual degrees of freedom at T={T}")
    out = np.empty(N)
    for j in range(N):
        y = values[:, j]
        X = lag_matrix(y[:, None], p, True)
        coef, *_ = np.linalg.lstsq(X, y[p:], rcond=None)
        resid = y[p:] - X @ coef
        out[j] = resid @ resid / dof
    degenerate = ~(out > VARIANCE_FLOOR)
    if np.any(degenerate):
        warnings.warn(
            f"degenerate AR residual variance for columns {np.flatnonzero(degenerate).tolist()}; "
            f"floored at {VARIANCE_FLOOR}",
            RuntimeWarning,
            stacklevel=2,
        )
        out[degenerate] = VARIANCE_FLOOR
    return out


def minnesota_row_variances(p: int, sigma2: np.ndarray, hyper: MinnesotaHyper,
                            include_intercept: bool = True) -> np.ndarray:
    sigma = np.sqrt(np.asarray(sigma2, dtype=float))
    lags = np.arange(1, p + 1, dtype=float)
    lag_part = 1.0 / (hyper.lambda1 * lags[:, None] ** hyper.lambda3 * sigma[None, :]) ** 2
    v = lag_part.ravel()
    if include_intercept:
        v = np.concatenate([[hyper.intercept_scale ** 2], v])
    return v


def minnesota_prior(p: int, ds: Dataset | np.ndarray, hyper: MinnesotaHyper | None = None,
                    include_intercept: bool = True) -> NiwPrior:
    """Conjugate Minnesota prior with AR residual scaling.

    ``M0`` centres own first lags on ``hyper.own_lag_mean``; ``V0`` is
    diagonal with lag-``l`` variance ``(1 / (lambda1 * l**lambda3 * s_j))**2``
    for regressor variable ``j``; ``nu0 = N + 2`` and ``S0 = diag(s**2)``.
    """
    hyper = hyper or MinnesotaHyper()
    sigma2 = ar_residual_variances(ds, p)
    N = sigma2.size
    off = 1 if include_intercept else 0
    M0 = np.zeros((off + N * p, N))
    M0[off + np.arange(N), np.arange(N)] = hyper.own_lag_mean
    V0 = np.diag(minnesota_row_variances(p, sigma2, hyper, include_intercept))
    return NiwPrior(M0, V0, float(N + 2), np.diag(sigma2))


def niw_posterior(prior: NiwPrior, d: DesignMatrices) -> NiwPosterior:
    """Conjugate update of a NIW prior with data ``Y = X B + E``."""
    X, Y = d.X, d.Y
    if X.shape[1] != prior.K or Y.shape[1] != prior.N:
        raise ValidationError(
            f"design (K={X.shape[1]}, N={Y.shape[1]}) does not match prior (K={prior.K}, N={prior.N})"
        )
    if d.T_eff == 0:
        return NiwPosterior(prior.M0.copy(), prior.V0.copy(), float(prior.nu0), prior.S0.copy())
    V0_fac = _cho_factor(prior.V0, "V0")
    V0_inv = linalg.cho_solve(V0_fac, np.eye(prior.K))
    V0_inv = (V0_inv + V0_inv.T) / 2
    P = V0_inv + X.T @ X
    P_fac = _cho_factor(P, "V0^-1 + X'X")
    Vn = linalg.cho_solve(P_fac, np.eye(prior.K))
    Vn = (Vn + Vn.T) / 2
    Mn = linalg.cho_solve(P_fac, V0_inv @ prior.M0 + X.T @ Y)
    # residual form of S0 + Y'Y + M0'V0^-1 M0 - Mn'Vn^-1 Mn; avoids cancellation
    E = Y - X @ Mn
    D = Mn - prior.M0
    Sn = prior.S0 + E.T @ E + D.T @ V0_inv @ D
    Sn = (Sn + Sn.T) / 2
    return NiwPosterior(Mn, Vn, float(prior.nu0 + d.T_eff), Sn)


def sample_inverse_wishart(nu: float, S: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw ``Sigma ~ IW(nu, S)`` (mean ``S / (nu - N - 1)``) by Bartlett's method."""
    S = np.atleast_2d(S)
    N = S.shape[0]
    if not nu > N - 1:
        raise ValidationError(f"inverse-Wishart needs nu > N - 1, got nu={nu}, N={N}")
    U = _cholesky(S, "inverse-Wishart scale")
    A = np.diag(np.sqrt(rng.chisquare(nu - np.arange(N))))
    rows, cols = np.tril_indices(N, -1)
    A[rows, cols] = rng.standard_normal(rows.size)
    # Sigma^-1 = U^-T A A' U^-1  =>  Sigma = (A^-1 U')' (A^-1 U')
    C = linalg.solve_triangular(A, U.T, lower=True)
    Sigma = C.T @ C
    return (Sigma + Sigma.T) / 2


def sample_matrix_normal(M: np.ndarray, V: np.ndarray, Sigma: np.ndarray,
                         rng: np.random.Generator, z: np.ndarray | None = None) -> np.ndarray:
    """Draw ``B ~ MN(M, V, Sigma)``: ``vec(B) ~ N(vec(M), Sigma kron V)``.

    ``z`` overrides the standard-normal block and exists for tests.
    """
    K, N = M.shape
    Lv = _cholesky(V, "matrix-normal row covariance")
    Ls = _cholesky(Sigma, "matrix-normal column covariance")
    if z is None:
        z = rng.standard_normal(K * N).reshape((K, N), order="F")
    return M + Lv @ z @ Ls.T


def sample_niw(post: NiwPosterior, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    Sigma = sample_inverse_wishart(post.nun, post.Sn, rng)
    B = sample_matrix_normal(post.Mn, post.Vn, Sigma, rng)
    return B, Sigma


def heteroskedastic_moments(prior: NiwPrior, d: DesignMatrices, h: np.ndarray, scale: np.ndarray):
    """Per-equation posterior means (K x N) and precision Cholesky factors.

    Equation ``j`` is a weighted regression with weights ``exp(-h[:, j])``
    and prior ``N(M0[:, j], scale[j] * V0)``.
    """
    X, Y = d.X, d.Y
    K, N = prior.K, prior.N
    if h.shape != Y.shape:
        raise ValidationError(f"log-volatility shape {h.shape} does not match residuals {Y.shape}")
    if not np.all(np.isfinite(h)):
        raise NumericalError("non-finite log-volatility in coefficient draw")
    V0_fac = _cho_factor(prior.V0, "V0")
    V0_inv = linalg.cho_solve(V0_fac, np.eye(K))
    V0_inv = (V0_inv + V0_inv.T) / 2
    means = np.empty((K, N))
    factors = []
    for j in range(N):
        w = np.exp(-h[:, j])
        Xw = X * w[:, None]
        P = V0_inv / scale[j] + X.T @ Xw
        L = _cholesky(P, f"posterior precision of equation {j}")
        rhs = V0_inv @ prior.M0[:, j] / scale[j] + Xw.T @ Y[:, j]
        means[:, j] = linalg.cho_solve((L, True), rhs)
        factors.append(L)
    return means, factors


def draw_coefficients_heteroskedastic(prior: NiwPrior, d: DesignMatrices, h: np.ndarray,
                                      scale: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Equation-by-equation coefficient draw under diagonal stochastic volatility.

    Equations are independent given ``h`` because the volatility is diagonal.
    """
    means, factors = heteroskedastic_moments(prior, d, h, scale)
    z = rng.standard_normal(means.shape)
    B = np.empty_like(means)
    for j, L in enumerate(factors):
        B[:, j] = means[:, j] + linalg.solve_triangular(L.T, z[:, j], lower=False)
    return B
