"""Immutable model, prior-hyperparameter and sampler settings."""

from __future__ import annotations

from dataclasses import dataclass

from .data import Dataset
from .errors import ValidationError

MIN_EXTRA_OBS = 10


@dataclass(frozen=True)
class ElbSpec:
    """Effective-lower-bound censoring for a set of variables.

    Observations at or below ``bound + censor_tolerance`` are treated as
    censored and their shadow values are sampled. Censored cells in the
    first ``p`` rows only enter the likelihood as regressors, so they also
    get a weak ``N(bound, presample_scale * var(observed series))`` prior
    that keeps their conditional proper when those lag coefficients are
    shrunk to zero.
    """

    applies_to: tuple[str, ...]
    bound: float = 0.125
    censor_tolerance: float = 1e-6
    presample_scale: float = 10.0

    def __post_init__(self):
        names = (self.applies_to,) if isinstance(self.applies_to, str) else tuple(self.applies_to)
        object.__setattr__(self, "applies_to", names)
        object.__setattr__(self, "bound", float(self.bound))
        if not names:
            raise ValidationError("ElbSpec.applies_to must name at least one variable")
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate names in ElbSpec.applies_to: {list(names)}")
        if self.censor_tolerance < 0:
            raise ValidationError("censor_tolerance must be >= 0")
        if not self.presample_scale > 0:
            raise ValidationError("presample_scale must be > 0")


@dataclass(frozen=True)
class VolatilitySpec:
    """Diagonal random-walk stochastic volatility.

    ``innovation_prior_shape``/``innovation_prior_scale`` are the
    inverse-gamma hyperparameters of each log-variance innovation variance,
    ``initial_logvol_variance`` is the prior variance of the first
    log-variance and ``log_offset`` is added to squared residuals before
    taking logs.
    """

    enabled: bool = True
    innovation_prior_shape: float = 3.0
    innovation_prior_scale: float = 0.01
    initial_logvol_variance: float = 10.0
    log_offset: float = 1e-4

    def __post_init__(self):
        for name in ("innovation_prior_shape", "innovation_prior_scale",
                     "initial_logvol_variance", "log_offset"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"VolatilitySpec.{name} must be positive")


@dataclass(frozen=True)
class SsvsSpec:
    spike_multiplier: float = 0.01
    slab_multiplier: float = 10.0
    prior_inclusion: float = 0.5
    force_intercept: bool = True

    def __post_init__(self):
        if not 0 < self.spike_multiplier <= self.slab_multiplier:
            raise ValidationError("SsvsSpec needs 0 < spike_multiplier <= slab_multiplier")
        if not 0 < self.prior_inclusion < 1:
            raise ValidationError("SsvsSpec.prior_inclusion must lie in (0, 1)")


@dataclass(frozen=True)
class ModelSpec:
    p: int
    include_intercept: bool = True
    elb: ElbSpec | None = None
    volatility: VolatilitySpec | None = None
    ssvs: SsvsSpec | None = None

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValidationError(f"lag order p must be a positive integer, got {self.p}")

    @property
    def sv_enabled(self) -> bool:
        return self.volatility is not None and self.volatility.enabled


@dataclass(frozen=True)
class SamplerConfig:
    """Gibbs run length.

    ``draws`` counts every iteration including burn-in; thinning is applied
    after burn-in is discarded, so ``retained_count`` draws are stored.
    """

    draws: int
    burn_in: int = 0
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.draws < 1:
            raise ValidationError("draws must be a positive integer")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be >= 0")
        if self.thin < 1:
            raise ValidationError("thin must be >= 1")
        if self.burn_in >= self.draws:
            raise ValidationError(f"burn_in ({self.burn_in}) must be smaller than draws ({self.draws})")


def retained_count(cfg: SamplerConfig) -> int:
    return (cfg.draws - cfg.burn_in) // cfg.thin


def validate(model: ModelSpec, ds: Dataset) -> ModelSpec:
    """Check a model against a dataset; raise listing every problem found."""
    problems = []
    if model.elb is not None:
        for name in model.elb.applies_to:
            if name not in ds.variables:
                problems.append(f"ELB variable {name!r} not in dataset variables {list(ds.variables)}")
    # usable rows after dropping p lags must exceed p + 10
    if ds.T - model.p <= model.p + MIN_EXTRA_OBS:
        problems.append(
            f"sample too short: T={ds.T} but p={model.p} needs T > {2 * model.p + MIN_EXTRA_OBS}"
        )
    if problems:
        raise ValidationError("; ".join(problems))
    return model
