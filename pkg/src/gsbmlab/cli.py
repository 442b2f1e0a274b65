"""Command-line front end.

Every subcommand accepts --seed, --out, --format and --precision; errors are
reported on stderr as a single JSON line {"code": N, "message": ...} with
exit codes 1 (validation), 2 (numerical failure), 3 (I/O).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments, prediction, qve, sampler, spectra
from .errors import NumericalError, ValidationError
from .model import GsbmSpec, NoiseFamily, NoiseKind, SbmParams, Shift, from_sbm

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class _CliArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so exit codes stay ours."""

    def error(self, message):
        raise _CliArgumentError(message)


def _fmt(x: float, precision: int | None) -> str:
    if precision is None:
        return repr(float(x))
    return f"{x:.{precision}g}"


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w") as f:
            f.write(text)
            if not text.endswith("\n"):
                f.write("\n")


def _add_common(p: argparse.ArgumentParser, default_format: str,
                formats: tuple[str, ...] = ("csv", "json")) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: GSBM_SEED env var or 0)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=list(formats), default=default_format,
                   help=f"output format (default: {default_format})")
    p.add_argument("--precision", type=int, default=None,
                   help="significant digits for text output "
                        "(default: shortest round-trip)")


def _add_spec_flags(p: argparse.ArgumentParser, lam_required: bool = False) -> None:
    p.add_argument("--gamma", type=float, required=True, help="first-block fraction")
    p.add_argument("--alpha1", type=float, required=True, help="first-block variance ratio")
    p.add_argument("--alpha2", type=float, required=True, help="second-block variance ratio")
    p.add_argument("--theta1", type=float, default=1.0, help="spike value on the first block")
    p.add_argument("--theta2", type=float, default=1.0, help="spike value on the second block")
    p.add_argument("--lambda", dest="lam", type=float, required=lam_required,
                   default=None if lam_required else 0.0, help="spike strength")
    p.add_argument("--n", type=int, default=None, help="matrix dimension")


def _add_sbm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="matrix dimension")
    p.add_argument("--n1", type=int, required=True, help="first community size")
    p.add_argument("--q", type=float, required=True, help="cross-community probability")
    p.add_argument("--p", type=float, default=None,
                   help="intra-community probability (hidden: first block only)")
    p.add_argument("--shift", choices=["hidden", "balanced"], default="hidden",
                   help="which constant shift to subtract")
    p.add_argument("--diagonal", choices=["zero", "keep"], default="zero",
                   help="zero the adjacency diagonal or draw it like its block")


def _spec_from_args(args) -> GsbmSpec:
    return GsbmSpec(gamma=args.gamma, alpha1=args.alpha1, alpha2=args.alpha2,
                    theta1=args.theta1, theta2=args.theta2,
                    lam=args.lam if args.lam is not None else 0.0, n=args.n)


def _sbm_from_args(args) -> SbmParams:
    shift = Shift.HIDDEN_COMMUNITY if args.shift == "hidden" else Shift.BALANCED
    p = args.p if args.p is not None else args.q
    p1 = p
    p2 = args.q if shift is Shift.HIDDEN_COMMUNITY else p
    return SbmParams(n=args.n, n1=args.n1, p1=p1, p2=p2, q=args.q,
                     zero_diagonal=args.diagonal == "zero", shift=shift)


def _noise_from_args(args) -> NoiseKind:
    family = NoiseFamily(args.noise)
    if family is NoiseFamily.CENTERED_BERNOULLI:
        return NoiseKind.centered_bernoulli(args.noise_q)
    return NoiseKind(family)


def _master_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("GSBM_SEED", "0"))


def _csv_row(d: dict, precision: int | None) -> str:
    header = ",".join(d)
    row = ",".join("" if v is None else
                   (_fmt(v, precision) if isinstance(v, float) else str(v))
                   for v in d.values())
    return f"{header}\n{row}\n"


def build_parser() -> _Parser:
    parser = _Parser(prog="gsbm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("threshold", help="closed-form outlier thresholds")
    p.add_argument("model", choices=["hidden", "unbalanced"])
    p.add_argument("--q", type=float, required=True, help="baseline edge probability")
    p.add_argument("--gamma", type=float, default=None,
                   help="community fraction (hidden model only)")
    p.add_argument("--n", type=int, required=True, help="matrix dimension")
    _add_common(p, "csv")

    p = sub.add_parser("edge", help="upper edge of the limiting density")
    _add_spec_flags(p)
    _add_common(p, "json")

    p = sub.add_parser("predict", help="outlier location and critical spike strength")
    _add_spec_flags(p, lam_required=True)
    _add_common(p, "json")

    p = sub.add_parser("density", help="limiting spectral density on a grid")
    _add_spec_flags(p)
    p.add_argument("--x-min", type=float, default=-3.0)
    p.add_argument("--x-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=qve.DEFAULT_GRID_POINTS)
    p.add_argument("--eta", type=float, default=qve.DEFAULT_ETA,
                   help="imaginary offset of the evaluation line")
    _add_common(p, "csv")

    p = sub.add_parser("sample", help="draw one matrix realization")
    p.add_argument("kind", choices=["adjacency", "shifted", "gsbm"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--shift", choices=["hidden", "balanced"], default="hidden")
    p.add_argument("--diagonal", choices=["zero", "keep"], default="zero")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--alpha1", type=float, default=None)
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument("--theta1", type=float, default=1.0)
    p.add_argument("--theta2", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--noise", choices=["gaussian", "rademacher", "bernoulli"],
                   default="gaussian")
    p.add_argument("--noise-q", type=float, default=0.5,
                   help="reference probability for bernoulli noise")
    _add_common(p, "bin", formats=("csv", "json", "bin"))

    p = sub.add_parser("histogram", help="one-shot spectrum histogram with prediction")
    _add_sbm_flags(p)
    p.add_argument("--bins", type=int, default=100)
    _add_common(p, "csv")

    p = sub.add_parser("sweep", help="Monte Carlo transition sweep over signal strengths")
    _add_sbm_flags(p)
    p.add_argument("--w-values", required=True,
                   help="comma-separated signal strengths (p = q + w/sqrt(n))")
    p.add_argument("--trials", type=int, default=1, help="trials per sweep value")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    _add_common(p, "csv")

    p = sub.add_parser("check", help="structural diagnostics on one sampled instance")
    _add_sbm_flags(p)
    p.add_argument("--z-re", type=float, default=1.0,
                   help="real part of the resolvent test point")
    p.add_argument("--z-im", type=float, default=0.1,
                   help="imaginary part of the resolvent test point")
    _add_common(p, "json")

    return parser


def _run_threshold(args) -> int:
    if args.model == "hidden":
        if args.gamma is None:
            raise ValidationError("the hidden-community threshold requires --gamma")
        value = prediction.hidden_threshold(args.q, args.gamma, args.n)
    else:
        value = prediction.unbalanced_threshold(args.q, args.n)
    if args.format == "json":
        _write_text(args.out, json.dumps({"model": args.model, "value": value}))
    else:
        _write_text(args.out, _fmt(value, args.precision))
    return EXIT_OK


def _edge_dict(edge: prediction.EdgeResult) -> dict:
    return {"l_plus": edge.l_plus, "method": edge.method.value,
            "certified_window": edge.certified_window,
            "m1_edge": edge.double_root_m[0], "mN_edge": edge.double_root_m[1]}


def _run_edge(args) -> int:
    edge = prediction.find_upper_edge(_spec_from_args(args))
    d = _edge_dict(edge)
    text = json.dumps(d) if args.format == "json" else _csv_row(d, args.precision)
    _write_text(args.out, text)
    return EXIT_OK


def _run_predict(args) -> int:
    pred = prediction.predict_outlier(_spec_from_args(args), args.lam)
    d = pred.to_dict()
    text = json.dumps(d) if args.format == "json" else _csv_row(d, args.precision)
    _write_text(args.out, text)
    return EXIT_OK


def _run_density(args) -> int:
    spec = _spec_from_args(args)
    grid = np.linspace(args.x_min, args.x_max, args.points)
    curve = qve.density(spec, grid, eta=args.eta)
    if args.format == "json":
        _write_text(args.out, json.dumps({"eta": curve.eta,
                                          "x": curve.grid.tolist(),
                                          "rho": curve.rho.tolist()}))
    else:
        lines = ["x,rho"]
        precision = 17 if args.precision is None else args.precision
        for x, r in zip(curve.grid, curve.rho):
            lines.append(f"{x:.{precision}g},{r:.{precision}g}")
        _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _run_sample(args) -> int:
    if args.out is None:
        raise ValidationError("sample requires --out")
    seed = sampler.SampleSeed(_master_seed(args), 0)
    if args.kind in ("adjacency", "shifted"):
        for flag in ("n1", "q"):
            if getattr(args, flag) is None:
                raise ValidationError(f"sample {args.kind} requires --{flag}")
        params = _sbm_from_args(args)
        mat = sampler.sample_sbm_adjacency(params, seed)
        if args.kind == "shifted":
            mat = sampler.shift_and_rescale(mat, params)
    else:
        for flag in ("gamma", "alpha1", "alpha2"):
            if getattr(args, flag) is None:
                raise ValidationError(f"sample gsbm requires --{flag}")
        if args.n is None:
            raise ValidationError("sample gsbm requires --n")
        spec = _spec_from_args(args)
        mat, _, _ = sampler.sample_gsbm(spec, _noise_from_args(args), seed)
    if args.format == "bin":
        mat.to_binary(args.out)
    elif args.format == "csv":
        mat.to_csv(args.out)
    else:
        iu = np.triu_indices(mat.n)
        _write_text(args.out, json.dumps({"n": mat.n,
                                          "upper_triangle": mat.data[iu].tolist()}))
    return EXIT_OK


def _experiment_config(args, sweep_values=(), trials=1, jobs=1) -> experiments.ExperimentConfig:
    return experiments.ExperimentConfig(
        base=_sbm_from_args(args), sweep_values=tuple(sweep_values),
        trials_per_point=trials, master_seed=_master_seed(args),
        bins=getattr(args, "bins", 100), jobs=jobs)


def _ensure_out_dir(args) -> Path:
    if args.out is None:
        raise ValidationError("this subcommand writes files and requires --out DIR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_histogram(args) -> int:
    out = _ensure_out_dir(args)
    result = experiments.run_histogram(_experiment_config(args))
    paths = experiments.emit_report(result, out)
    sys.stdout.write("\n".join(str(p) for p in paths) + "\n")
    return EXIT_OK


def _run_sweep(args) -> int:
    out = _ensure_out_dir(args)
    try:
        values = [float(v) for v in args.w_values.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --w-values: {exc}") from exc
    table = experiments.run_transition_sweep(
        _experiment_config(args, sweep_values=values, trials=args.trials,
                           jobs=args.jobs))
    paths = experiments.emit_report(table, out)
    sys.stdout.write("\n".join(str(p) for p in paths) + "\n")
    return EXIT_OK


def _run_check(args) -> int:
    params = _sbm_from_args(args)
    seed = sampler.SampleSeed(_master_seed(args), 0)
    spec, _, _ = from_sbm(params)
    adj = sampler.sample_sbm_adjacency(params, seed)
    m = sampler.shift_and_rescale(adj, params)
    u = spec.spike_vector()
    h = sampler.SymMatrix(m.data - spec.lam * np.outer(u, u))

    report = spectra.eigen_symmetric(m, want_vectors=1)
    report = spectra.attach_noise_spectrum(report, h)
    ok_inter, margin = spectra.check_interlacing(report)
    lam1 = float(report.eigenvalues_m[0])
    mu1 = float(report.eigenvalues_h[0])
    ok_bound = spec.lam - mu1 - 1e-9 <= lam1 <= spec.lam + mu1 + 1e-9
    residual = float(spectra.eigen_residuals(
        m, report.eigenvalues_m[:1], report.top_vector.reshape(-1, 1),
        norm=float(np.max(np.abs(report.eigenvalues_m))))[0])
    ok_residual = residual <= 1e-10
    law = spectra.check_local_law(h, spec, u, complex(args.z_re, args.z_im))

    results = {
        "interlacing": {"ok": ok_inter, "worst_margin": margin},
        "eigen_residual": {"ok": ok_residual, "value": residual},
        "norm_bound": {"ok": ok_bound, "lambda1": lam1, "mu1": mu1,
                       "lambda": spec.lam},
        "local_law": {"ok": not law.flagged, "deviation": law.deviation,
                      "threshold": law.threshold,
                      "z": [law.z.real, law.z.imag]},
    }
    all_ok = all(v["ok"] for v in results.values())
    results["all_ok"] = all_ok
    _write_text(args.out, json.dumps(results))
    if not all_ok:
        raise NumericalError("structural diagnostics failed: " + ", ".join(
            k for k, v in results.items() if k != "all_ok" and not v["ok"]))
    return EXIT_OK


_RUNNERS = {
    "threshold": _run_threshold,
    "edge": _run_edge,
    "predict": _run_predict,
    "density": _run_density,
    "sample": _run_sample,
    "histogram": _run_histogram,
    "sweep": _run_sweep,
    "check": _run_check,
}


def _fail(code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"code": code, "message": message}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliArgumentError as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    try:
        return _RUNNERS[args.subcommand](args)
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))


if __name__ == "__main__":
    sys.exit(main())
