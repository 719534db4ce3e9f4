"""Configuration-driven command line: ``srvar fit | forecast | simulate``.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import report
from .bvar import MinnesotaHyper, minnesota_prior
from .config import ElbSpec, ModelSpec, SamplerConfig, SsvsSpec, VolatilitySpec, retained_count
from .data import load_csv, simulate_demo
from .errors import NumericalError, ValidationError
from .forecast import forecast
from .gibbs import fit

log = logging.getLogger("srvar")

REQUIRED_KEYS = ("data.path", "model.p", "sampler.draws", "output.dir")


def _get(cfg: dict, key: str, default=None):
    node = cfg
    for part in key.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def load_config(path) -> dict:
    path = Path(path)
    try:
        cfg = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ValidationError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError(f"config {path} must be a mapping")
    missing = [k for k in REQUIRED_KEYS if _get(cfg, k) is None]
    if missing:
        raise ValidationError(f"config {path} is missing required key(s): {', '.join(missing)}")
    return cfg


def build_specs(cfg: dict) -> tuple[ModelSpec, MinnesotaHyper, SamplerConfig]:
    try:
        elb_cfg = _get(cfg, "model.elb")
        elb = None
        if elb_cfg:
            elb = ElbSpec(applies_to=tuple(elb_cfg["applies_to"]), bound=elb_cfg.get("bound", 0.125),
                          censor_tolerance=elb_cfg.get("censor_tolerance", 1e-6),
                          presample_scale=elb_cfg.get("presample_scale", 10.0))
        vol_cfg = _get(cfg, "model.volatility")
        vol = VolatilitySpec(**vol_cfg) if vol_cfg and vol_cfg.get("enabled", True) else None
        ssvs_cfg = _get(cfg, "model.ssvs")
        ssvs = None
        if ssvs_cfg is not None and ssvs_cfg is not False:
            ssvs = SsvsSpec(**(ssvs_cfg if isinstance(ssvs_cfg, dict) else {}))
        model = ModelSpec(
            p=int(_get(cfg, "model.p")),
            include_intercept=bool(_get(cfg, "model.include_intercept", True)),
            elb=elb, volatility=vol, ssvs=ssvs,
        )
        hyper = MinnesotaHyper(lambda1=float(_get(cfg, "prior.lambda1", 1.0)),
                               lambda3=float(_get(cfg, "prior.lambda3", 1.0)))
        sampler = SamplerConfig(
            draws=int(_get(cfg, "sampler.draws")),
            burn_in=int(_get(cfg, "sampler.burn_in", 0)),
            thin=int(_get(cfg, "sampler.thin", 1)),
            seed=int(_get(cfg, "sampler.seed", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed configuration: {exc}") from exc
    return model, hyper, sampler


def _data_path(cfg: dict, config_path) -> Path:
    p = Path(_get(cfg, "data.path"))
    return p if p.is_absolute() else Path(config_path).parent / p


def _out_dir(cfg: dict, config_path) -> Path:
    p = Path(_get(cfg, "output.dir"))
    return p if p.is_absolute() else Path(config_path).parent / p


def _rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    return np.random.default_rng(seed), np.random.default_rng([seed, 1])


def _run_fit(cfg: dict, config_path):
    model, hyper, sampler = build_specs(cfg)
    ds = load_csv(_data_path(cfg, config_path))
    prior = minnesota_prior(model.p, ds, hyper, model.include_intercept)
    fit_rng, _ = _rngs(sampler.seed)
    log.info("fitting %d iterations (%d retained)", sampler.draws, retained_count(sampler))
    result = fit(ds, model, prior, sampler, rng=fit_rng)
    meta = {
        "seed": sampler.seed,
        "retained_draws": len(result.draws),
        "config": cfg,
        "diagnostics": result.diagnostics,
    }
    report.write_fit_outputs(result, _out_dir(cfg, config_path), meta)
    return result


def cmd_fit(config_path) -> int:
    cfg = load_config(config_path)
    _run_fit(cfg, config_path)
    return 0


def cmd_forecast(config_path, refit: bool = False) -> int:
    cfg = load_config(config_path)
    out = _out_dir(cfg, config_path)
    if refit:
        result = _run_fit(cfg, config_path)
    else:
        result = report.load_posterior(out / report.POSTERIOR_FILE)
    horizons = _get(cfg, "forecast.horizons", [1, 4, 8])
    draws = int(_get(cfg, "forecast.draws", 500))
    _, fc_rng = _rngs(result.sampler.seed)
    fc = forecast(result, horizons, draws, rng=fc_rng)
    report.write_forecast_outputs(fc, out)
    return 0


def cmd_simulate(T: int, seed: int, out_path) -> int:
    ds, truth = simulate_demo(T, seed)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    report.save_dataset(ds, out_path)
    sidecar = out_path.with_name(f"truth_{out_path.name}")
    header = ["shadow"] + [f"h_{v}" for v in ds.variables]
    rows = [[float(truth.shadow_path[t])] + [float(x) for x in truth.volatility_path[t]]
            for t in range(ds.T)]
    report.write_csv(sidecar, header, rows)
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srvar", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    f = sub.add_parser("fit", help="run the Gibbs sampler and write posterior summaries")
    f.add_argument("--config", required=True)
    fc = sub.add_parser("forecast", help="simulate predictive paths and write quantiles and fan charts")
    fc.add_argument("--config", required=True)
    fc.add_argument("--refit", action="store_true", help="fit first instead of loading output.dir")
    s = sub.add_parser("simulate", help="write the censored two-variable demo dataset")
    s.add_argument("--T", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fit":
            return cmd_fit(args.config)
        if args.command == "forecast":
            return cmd_forecast(args.config, args.refit)
        return cmd_simulate(args.T, args.seed, args.out)
    except ValidationError as exc:
        print(f"srvar: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"srvar: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
