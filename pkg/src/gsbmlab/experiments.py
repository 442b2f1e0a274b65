"""Monte Carlo orchestration: eigenvalue histograms and transition sweeps.

A sweep runs over signal strengths: for a Bernoulli base the sweep values
are w with edge probability p = q + w/sqrt(N) (applied to the blocks the
shift kind prescribes); for a limiting-spec base they are spike strengths.
Every (point, trial) pair draws its matrix from an independent, reproducible
stream, so identical configurations produce identical outputs byte for byte.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .model import GsbmSpec, NoiseKind, SbmParams, Shift, from_sbm, validate_sbm, validate_spec
from .prediction import OutlierPrediction, predict_outlier
from .sampler import SampleSeed, SymMatrix, sample_gsbm, sample_sbm_adjacency, shift_and_rescale
from .spectra import SpectralReport, community_overlap_from_vector, eigen_symmetric, top_eigenpairs


@dataclass(frozen=True)
class ExperimentConfig:
    base: SbmParams | GsbmSpec
    sweep_values: tuple[float, ...] = ()
    trials_per_point: int = 1
    noise: NoiseKind = field(default_factory=NoiseKind.gaussian)
    master_seed: int = 0
    outputs: Path | None = None
    bins: int = 100
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        if isinstance(self.base, SbmParams):
            validate_sbm(self.base)
        else:
            validate_spec(self.base)
        if self.trials_per_point < 1:
            raise ValidationError("trials_per_point must be >= 1")
        if self.sweep_values and not all(math.isfinite(v) for v in self.sweep_values):
            raise ValidationError("sweep values must be finite")
        if self.bins < 1:
            raise ValidationError("bins must be >= 1")
        if self.jobs < 1:
            raise ValidationError("jobs must be >= 1")
        return self

    def echo(self) -> dict:
        base = json.loads(self.base.to_json())
        base["kind"] = "sbm" if isinstance(self.base, SbmParams) else "gsbm"
        return {"base": base, "sweep_values": list(self.sweep_values),
                "trials_per_point": self.trials_per_point,
                "noise": self.noise.family.value, "master_seed": self.master_seed,
                "bins": self.bins}


@dataclass(frozen=True)
class HistogramData:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_total: int

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if len(counts) != len(edges) - 1:
            raise ValidationError("need one more bin edge than bin count")
        if np.any(np.diff(edges) <= 0):
            raise ValidationError("bin edges must be strictly ascending")
        if np.any(counts < 0) or int(counts.sum()) != self.n_total:
            raise ValidationError("bin counts must be nonnegative and sum to n_total")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class HistogramResult:
    data: HistogramData
    report: SpectralReport
    config: ExperimentConfig


@dataclass(frozen=True)
class TransitionRow:
    sweep_value: float
    trial: int
    lambda1: float
    lambda2: float
    gap: float
    overlap: float
    predicted_z: float
    predicted_gap: float


@dataclass(frozen=True)
class PointAggregate:
    sweep_value: float
    mean_gap: float
    sd_gap: float
    mean_overlap: float
    sd_overlap: float
    predicted_z: float
    predicted_gap: float


@dataclass(frozen=True)
class TransitionTable:
    rows: tuple[TransitionRow, ...]
    aggregates: tuple[PointAggregate, ...]
    lambda_c: float
    l_plus: float
    config: ExperimentConfig
    errors: tuple[tuple[float, int, str], ...] = ()


def _point_params(base: SbmParams, w: float) -> SbmParams:
    """Bernoulli parameters at signal strength w: p = q + w/sqrt(n)."""
    p = base.q + w / math.sqrt(base.n)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"sweep value w={w} pushes p={p} outside [0,1]")
    if base.shift is Shift.HIDDEN_COMMUNITY:
        return replace(base, p1=p)
    return replace(base, p1=p, p2=p)


def _instance(config: ExperimentConfig, sweep_value: float | None,
              seed: SampleSeed) -> tuple[SymMatrix, SymMatrix, np.ndarray, GsbmSpec]:
    """Sample one (M, H, u, spec) instance for a sweep point."""
    if isinstance(config.base, SbmParams):
        params = config.base if sweep_value is None else _point_params(config.base, sweep_value)
        spec, _, _ = from_sbm(params)
        adj = sample_sbm_adjacency(params, seed)
        m = shift_and_rescale(adj, params)
        u = spec.spike_vector()
        h = SymMatrix(m.data - spec.lam * np.outer(u, u))
        return m, h, u, spec
    spec = config.base if sweep_value is None else replace(config.base, lam=sweep_value)
    validate_spec(spec)
    m, h, u = sample_gsbm(spec, config.noise, seed)
    return m, h, u, spec


def _reference_spec(config: ExperimentConfig) -> GsbmSpec:
    """Signal-free spec used for the sweep-level lambda_c and l_plus."""
    if isinstance(config.base, SbmParams):
        base = config.base
        if base.shift is Shift.HIDDEN_COMMUNITY:
            null = replace(base, p1=base.q)
        else:
            null = replace(base, p1=base.q, p2=base.q)
        spec, _, _ = from_sbm(null)
        return spec
    return replace(config.base, lam=0.0)


def run_histogram(config: ExperimentConfig) -> HistogramResult:
    """Sample one matrix, bin its full spectrum, attach the prediction."""
    config.validate()
    if len(config.sweep_values) > 1:
        raise ValidationError("histogram runs take at most one sweep value")
    sweep_value = config.sweep_values[0] if config.sweep_values else None
    seed = SampleSeed(config.master_seed, 0)
    m, h, u, spec = _instance(config, sweep_value, seed)
    report = eigen_symmetric(m)
    prediction = predict_outlier(spec, spec.lam)
    report = replace(report, predicted=prediction)
    values = report.eigenvalues_m
    lo, hi = float(values.min()) - 0.1, float(values.max()) + 0.1
    counts, edges = np.histogram(values, bins=config.bins, range=(lo, hi))
    data = HistogramData(bin_edges=edges, counts=counts, n_total=values.size)
    return HistogramResult(data=data, report=report, config=config)


def _run_trial(config: ExperimentConfig, point_index: int, sweep_value: float,
               trial: int, prediction: OutlierPrediction) -> TransitionRow:
    stream = point_index * config.trials_per_point + trial
    seed = SampleSeed(config.master_seed, stream)
    m, _, _, spec = _instance(config, sweep_value, seed)
    values, vectors = top_eigenpairs(m, k=2)
    lam1, lam2 = float(values[0]), float(values[1])
    _, overlap = community_overlap_from_vector(vectors[:, 0], spec)
    predicted_z = float(prediction.z if prediction.z is not None
                        else prediction.l_plus)
    predicted_gap = float(prediction.gap if prediction.gap is not None else 0.0)
    return TransitionRow(sweep_value=sweep_value, trial=trial, lambda1=lam1,
                         lambda2=lam2, gap=lam1 - lam2, overlap=overlap,
                         predicted_z=predicted_z, predicted_gap=predicted_gap)


def _predictions_per_point(config: ExperimentConfig
                           ) -> tuple[list[OutlierPrediction | None],
                                      list[tuple[float, int, str]]]:
    preds: list[OutlierPrediction | None] = []
    errors: list[tuple[float, int, str]] = []
    for w in config.sweep_values:
        try:
            if isinstance(config.base, SbmParams):
                spec, _, _ = from_sbm(_point_params(config.base, w))
                preds.append(predict_outlier(spec, spec.lam))
            else:
                spec = replace(config.base, lam=w)
                preds.append(predict_outlier(spec, w))
        except Exception as exc:  # noqa: BLE001 - per-point isolation
            preds.append(None)
            errors.append((w, -1, str(exc)))
    return preds, errors


def run_transition_sweep(config: ExperimentConfig) -> TransitionTable:
    """Sample, eigensolve, and record gap/overlap for every (point, trial)."""
    config.validate()
    if not config.sweep_values:
        raise ValidationError("sweep requires at least one sweep value")
    predictions, point_errors = _predictions_per_point(config)

    tasks = [(i, w, t) for i, w in enumerate(config.sweep_values)
             for t in range(config.trials_per_point)
             if predictions[i] is not None]
    rows: list[TransitionRow] = []
    errors: list[tuple[float, int, str]] = list(point_errors)
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = {pool.submit(_run_trial, config, i, w, t, predictions[i]): (w, t)
                       for i, w, t in tasks}
            for future, (w, t) in futures.items():
                try:
                    rows.append(future.result())
                except Exception as exc:  # noqa: BLE001 - per-row isolation
                    errors.append((w, t, str(exc)))
    else:
        for i, w, t in tasks:
            try:
                rows.append(_run_trial(config, i, w, t, predictions[i]))
            except Exception as exc:  # noqa: BLE001 - per-row isolation
                errors.append((w, t, str(exc)))
    rows.sort(key=lambda r: (r.sweep_value, r.trial))

    aggregates = []
    for w, pred in zip(config.sweep_values, predictions):
        point_rows = [r for r in rows if r.sweep_value == w]
        if not point_rows or pred is None:
            continue
        gaps = np.array([r.gap for r in point_rows])
        overlaps = np.array([r.overlap for r in point_rows])
        sd = float(np.std(gaps, ddof=1)) if len(gaps) > 1 else 0.0
        sd_ov = float(np.std(overlaps, ddof=1)) if len(overlaps) > 1 else 0.0
        aggregates.append(PointAggregate(
            sweep_value=w, mean_gap=float(gaps.mean()), sd_gap=sd,
            mean_overlap=float(overlaps.mean()), sd_overlap=sd_ov,
            predicted_z=pred.z if pred.z is not None else pred.l_plus,
            predicted_gap=pred.gap if pred.gap is not None else 0.0))

    reference = predict_outlier(_reference_spec(config), 0.0)
    return TransitionTable(rows=tuple(rows), aggregates=tuple(aggregates),
                           lambda_c=reference.lambda_c, l_plus=reference.l_plus,
                           config=config, errors=tuple(errors))


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _write_atomic(path: Path, text: str) -> None:
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write report file {path}: {exc}") from exc


def _histogram_csv(data: HistogramData) -> str:
    lines = ["bin_left,bin_right,count"]
    for left, right, count in zip(data.bin_edges[:-1], data.bin_edges[1:], data.counts):
        lines.append(f"{left:.17g},{right:.17g},{count}")
    return "\n".join(lines) + "\n"


def _sweep_csv(table: TransitionTable) -> str:
    lines = ["w,trial,lambda1,lambda2,gap,overlap,predicted_z"]
    for r in table.rows:
        # float() guards against numpy scalars, whose repr is not parseable
        cells = [repr(float(v)) for v in (r.sweep_value, r.lambda1, r.lambda2,
                                          r.gap, r.overlap, r.predicted_z)]
        cells.insert(1, str(r.trial))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_report(result: HistogramResult | TransitionTable,
                out_dir=None) -> list[Path]:
    """Write CSV plus JSON summary atomically; returns the paths written.

    ``out_dir`` defaults to the config's ``outputs`` directory.
    """
    if out_dir is None:
        out_dir = result.config.outputs
    if out_dir is None:
        raise ValidationError("no output directory: pass out_dir or set "
                              "ExperimentConfig.outputs")
    out = Path(out_dir)
    if not out.is_dir():
        raise OSError(f"output directory does not exist: {out}")
    if isinstance(result, HistogramResult):
        pred = result.report.predicted
        summary = {
            "config_echo": result.config.echo(),
            "lambda_c": pred.lambda_c if pred else None,
            "l_plus": pred.l_plus if pred else None,
            "z": pred.z if pred else None,
            "gap": pred.gap if pred else None,
            "method": pred.method.value if pred else None,
            "marginal": pred.marginal if pred else None,
            "observed": {
                "lambda1": float(result.report.eigenvalues_m[0]),
                "lambda2": float(result.report.eigenvalues_m[1]),
                "gap": result.report.gap,
            },
        }
        csv_path, json_path = out / "hist.csv", out / "summary.json"
        _write_atomic(csv_path, _histogram_csv(result.data))
        _write_atomic(json_path, json.dumps(summary, indent=1) + "\n")
        return [csv_path, json_path]
    if isinstance(result, TransitionTable):
        summary = {
            "config_echo": result.config.echo(),
            "lambda_c": result.lambda_c,
            "l_plus": result.l_plus,
            "per_point": [
                {"w": a.sweep_value, "mean_gap": a.mean_gap, "sd_gap": a.sd_gap,
                 "mean_overlap": a.mean_overlap, "predicted_z": a.predicted_z}
                for a in result.aggregates
            ],
        }
        if result.errors:
            summary["errors"] = [
                {"w": w, "trial": t, "message": msg} for w, t, msg in result.errors
            ]
        csv_path, json_path = out / "sweep.csv", out / "summary.json"
        _write_atomic(csv_path, _sweep_csv(result))
        _write_atomic(json_path, json.dumps(summary, indent=1) + "\n")
        return [csv_path, json_path]
    raise ValidationError(f"cannot emit a report for {type(result).__name__}")
