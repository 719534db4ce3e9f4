"""Delimited output, posterior archives and figure emission for the CLI."""

from __future__ import annotations

import csv
import io
import json
import zipfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import plotting
from .bvar import NiwPrior, row_labels
from .config import ElbSpec, ModelSpec, SamplerConfig, SsvsSpec, VolatilitySpec
from .data import Dataset
from .errors import ValidationError
from .forecast import DEFAULT_PROBS, ForecastResult, quantiles
from .gibbs import Draw, PosteriorResult, posterior_summary

POSTERIOR_FILE = "posterior.npz"
_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])


def save_dataset(ds: Dataset, path):
    header = (["date"] if ds.time_index is not None else []) + list(ds.variables)
    rows = []
    for t in range(ds.T):
        row = [ds.time_index[t].isoformat()] if ds.time_index is not None else []
        rows.append(row + [float(v) for v in ds.values[t]])
    write_csv(path, header, rows)


def time_labels(ds: Dataset, start: int = 0) -> list:
    if ds.time_index is not None:
        return [d.isoformat() for d in ds.time_index[start:]]
    return list(range(start, ds.T))


# ---------------------------------------------------------------------------
# posterior archive

def _model_to_dict(model: ModelSpec) -> dict:
    return asdict(model)


def _model_from_dict(d: dict) -> ModelSpec:
    return ModelSpec(
        p=d["p"],
        include_intercept=d["include_intercept"],
        elb=ElbSpec(**d["elb"]) if d.get("elb") else None,
        volatility=VolatilitySpec(**d["volatility"]) if d.get("volatility") else None,
        ssvs=SsvsSpec(**d["ssvs"]) if d.get("ssvs") else None,
    )


def save_posterior(result: PosteriorResult, path):
    """Write draws plus spec snapshot as an ``.npz`` with fixed zip timestamps."""
    arrays = {
        "values": np.asarray(result.dataset.values),
        "M0": result.prior.M0, "V0": result.prior.V0, "S0": result.prior.S0,
    }
    for name in Draw.__dataclass_fields__:
        if getattr(result.draws[0], name) is not None:
            arrays[f"draw_{name}"] = result.stack(name)
    meta = {
        "variables": list(result.dataset.variables),
        "time_index": None if result.dataset.time_index is None
        else [d.isoformat() for d in result.dataset.time_index],
        "model": _model_to_dict(result.model),
        "sampler": asdict(result.sampler),
        "nu0": result.prior.nu0,
        "diagnostics": result.diagnostics,
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, arr in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arr), allow_pickle=False)
            zf.writestr(zipfile.ZipInfo(f"{name}.npy", _ZIP_DATE), buf.getvalue())
        zf.writestr(zipfile.ZipInfo("meta.json", _ZIP_DATE), json.dumps(meta, sort_keys=True))


def load_posterior(path) -> PosteriorResult:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no fitted posterior at {path}; run `srvar fit` first or pass --refit")
    with zipfile.ZipFile(path) as zf:
        meta = json.loads(zf.read("meta.json"))
    with np.load(path, allow_pickle=False) as npz:
        arrays = {k: npz[k] for k in npz.files}
    ds = Dataset.from_arrays(arrays["values"], meta["variables"], meta["time_index"])
    prior = NiwPrior(arrays["M0"], arrays["V0"], meta["nu0"], arrays["S0"])
    fields = {name: arrays.get(f"draw_{name}") for name in Draw.__dataclass_fields__}
    R = fields["B"].shape[0]
    draws = tuple(
        Draw(**{k: (None if v is None else v[i]) for k, v in fields.items()}) for i in range(R)
    )
    return PosteriorResult(draws, _model_from_dict(meta["model"]), prior,
                           SamplerConfig(**meta["sampler"]), ds, meta["diagnostics"])


# ---------------------------------------------------------------------------
# fit outputs

def write_fit_outputs(result: PosteriorResult, out_dir, meta: dict) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds, model = result.dataset, result.model
    written = []

    labels = row_labels(ds.variables, model.p, model.include_intercept)
    summ = posterior_summary(result, "B")
    rows = [[labels[k], ds.variables[j], summ.mean[k, j], summ.sd[k, j]]
            for j in range(ds.N) for k in range(len(labels))]
    path = out / "coefficients_summary.csv"
    write_csv(path, ["row", "equation", "mean", "sd"], rows)
    written.append(path)

    if model.elb is not None:
        shadow = result.stack("shadow")
        q = np.quantile(shadow, DEFAULT_PROBS, axis=0)
        times = time_labels(ds)
        rows = []
        for name in model.elb.applies_to:
            j = ds.column(name)
            rows += [[times[t], name, float(ds.values[t, j]), q[0, t, j], q[1, t, j], q[2, t, j]]
                     for t in range(ds.T)]
            fig = out / f"shadowplot_{name}.svg"
            plotting.plot_shadow_rate(np.arange(ds.T), ds.values[:, j], q[1, :, j], fig,
                                      bound=model.elb.bound, name=name, band=(q[0, :, j], q[2, :, j]))
            written.append(fig)
        path = out / "shadow_median.csv"
        write_csv(path, ["time", "variable", "observed", "shadow_q10", "shadow_q50", "shadow_q90"], rows)
        written.append(path)

    if model.sv_enabled:
        vol = np.exp(result.stack("h") / 2).mean(axis=0)
        times = time_labels(ds, model.p)
        path = out / "volatility_mean.csv"
        write_csv(path, ["time"] + list(ds.variables),
                  [[times[t]] + [float(v) for v in vol[t]] for t in range(vol.shape[0])])
        written.append(path)
        fig = out / "volatility.svg"
        plotting.plot_volatility(np.arange(model.p, ds.T), vol, ds.variables, fig)
        written.append(fig)

    if model.ssvs is not None:
        freq = posterior_summary(result, "gamma").mean
        path = out / "inclusion.csv"
        write_csv(path, ["row", "inclusion_frequency"], [[labels[k], float(freq[k])] for k in range(len(labels))])
        written.append(path)

    path = out / POSTERIOR_FILE
    save_posterior(result, path)
    written.append(path)

    path = out / "result.meta"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    return written


def write_forecast_outputs(fc: ForecastResult, out_dir, probs=DEFAULT_PROBS) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = [f"q{round(100 * q):02d}" for q in probs]
    rows = []
    tables = {s: quantiles(fc, probs, s) for s in ("shadow", "observed")}
    for series, tab in tables.items():
        for hi, h in enumerate(fc.horizons):
            for j, name in enumerate(fc.variables):
                rows.append([series, h, name] + [float(v) for v in tab[hi, j]])
    path = out / "forecast_quantiles.csv"
    write_csv(path, ["series", "horizon", "variable"] + cols, rows)
    written = [path]
    for name in fc.elb_variables:
        j = fc.variables.index(name)
        tab = tables["shadow"]
        fig = out / f"fanchart_{name}.svg"
        plotting.plot_fan_chart(fc.horizons, tab[:, j, 0], tab[:, j, len(probs) // 2], tab[:, j, -1],
                                fig, name=name, bound=fc.bound)
        written.append(fig)
    return written
