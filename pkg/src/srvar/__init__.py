"""Bayesian VARs with shadow-rate censoring, stochastic volatility and SSVS."""

from .bvar import MinnesotaHyper, NiwPrior, minnesota_prior
from .config import ElbSpec, ModelSpec, SamplerConfig, SsvsSpec, VolatilitySpec, retained_count, validate
from .data import Dataset, load_csv, simulate_demo, transform
from .errors import NumericalError, ValidationError
from .forecast import ForecastResult, forecast, quantiles
from .gibbs import Draw, PosteriorResult, fit, posterior_summary

__all__ = [
    "Dataset", "load_csv", "simulate_demo", "transform",
    "ElbSpec", "ModelSpec", "SamplerConfig", "SsvsSpec", "VolatilitySpec", "retained_count", "validate",
    "MinnesotaHyper", "NiwPrior", "minnesota_prior",
    "Draw", "PosteriorResult", "fit", "posterior_summary",
    "ForecastResult", "forecast", "quantiles",
    "NumericalError", "ValidationError",
]

__version__ = "0.1.0"
