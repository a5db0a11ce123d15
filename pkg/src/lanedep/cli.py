"""Command-line pipeline driver.

Subcommands cover the full chain: ``synth`` (known-truth corpora),
``extract`` (traces to features), ``fit`` (bounded mixture), ``sample``
(new events from a model), ``simulate`` (controlled replay), and
``evaluate`` (controller on/off comparison).  Every subcommand writes
into an output directory and drops a ``meta.json`` sidecar with the
tool version, seed, and SHA-256 hashes of the inputs, so a run can be
audited and reproduced.  Outputs contain no timestamps; rerunning a
command with the same inputs and seed reproduces the files byte for
byte.

Exit codes: 0 on success, 2 for usage/validation/data errors, 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bgmm import EmConfig, MomentMethod, bic, em_fit, load_model, save_model
from .errors import LaneDepError
from .metrics import evaluate_batch, write_running_mean_csv
from .sampling import DEFAULT_N_GEN, sample_events
from .synth import default_synth_spec, generate_corpus, load_synth_spec
from .traces import (
    EventFilterCriteria,
    Side,
    extract_features,
    read_features_csv,
    read_trace_csv,
    write_features_csv,
    write_trace_csv,
)
from .vehicle import load_vehicle_config, simulate_event

logger = logging.getLogger(__name__)

_REJECTION_HEADER = ("file", "criterion", "detail")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_json(doc: dict, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_meta(out_dir: Path, subcommand: str, seed: int | None, inputs: list[Path]) -> None:
    """Drop the reproducibility sidecar next to the subcommand outputs."""
    meta = {
        "tool": "lanedep",
        "version": __version__,
        "subcommand": subcommand,
        "seed": seed,
        "inputs": {p.name: _sha256(p) for p in sorted(inputs, key=lambda p: p.name)},
    }
    _write_json(meta, out_dir / "meta.json")


def _out_dir(args) -> Path:
    if args.out is None:
        raise LaneDepError("--out is required")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _trace_files(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise LaneDepError(f"not a directory: {directory}")
    return sorted(directory.glob("*.csv"))


def _parse_side(value: str | None) -> Side | None:
    return Side(value) if value else None


# ---------------------------------------------------------------------------
# subcommands


def cmd_extract(args) -> None:
    out = _out_dir(args)
    files = _trace_files(args.trace_dir)
    side = _parse_side(args.side)
    criteria = EventFilterCriteria(
        min_duration=args.min_duration,
        max_duration=args.max_duration,
        min_mean_speed=args.min_speed,
    )
    features = []
    rejections = []
    for path in files:
        try:
            trace = read_trace_csv(path, side=side)
            features.append(extract_features(trace, criteria))
        except LaneDepError as exc:
            criterion = getattr(exc, "criterion", type(exc).__name__)
            rejections.append((path.name, criterion, str(exc)))
            logger.info("skipping %s: %s", path.name, exc)
    write_features_csv(out / "features.csv", features)
    with open(out / "rejections.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_REJECTION_HEADER)
        writer.writerows(rejections)
    _write_meta(out, "extract", None, files)
    print(f"extracted {len(features)} events, rejected {len(rejections)}")


def _parse_k_range(text: str) -> list[int]:
    """Accept a single K or an inclusive low:high sweep."""
    if ":" in text:
        lo_s, _, hi_s = text.partition(":")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            raise LaneDepError(f"invalid K range {text!r}, expected like 1:8") from None
        if lo < 1 or hi < lo:
            raise LaneDepError(f"invalid K range {text!r}, expected like 1:8")
        return list(range(lo, hi + 1))
    try:
        k = int(text)
    except ValueError:
        raise LaneDepError(f"invalid K {text!r}") from None
    if k < 1:
        raise LaneDepError(f"K must be at least 1, got {k}")
    return [k]


def cmd_fit(args) -> None:
    out = _out_dir(args)
    features_path = Path(args.features)
    if not features_path.exists():
        raise LaneDepError(f"features file not found: {features_path}")
    features = read_features_csv(features_path)
    side = _parse_side(args.side)
    if side is None and features and len({xi.side for xi in features}) == 1:
        side = features[0].side
    ks = _parse_k_range(args.k)
    method = MomentMethod(args.moment_method)
    rows = []
    best = None
    for k in ks:
        config = EmConfig(
            K=k,
            tol=args.tol,
            max_iter=args.max_iter,
            cov_floor=args.cov_floor,
            seed=args.seed,
            moment_method=method,
        )
        model, trace = em_fit(features, config, side=side)
        b = model.fit_info.bic
        rows.append((k, b, model.fit_info.final_log_likelihood))
        logger.info("K=%d: loglik=%.4f bic=%.4f (%d iterations)", k, rows[-1][2], b, len(trace))
        if best is None or b < best[0]:
            best = (b, model)
    if len(ks) > 1:
        with open(out / "bic.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["K", "bic", "loglik"])
            for k, b, ll in rows:
                writer.writerow([k, repr(b), repr(ll)])
    save_model(best[1], out / "model.json")
    _write_meta(out, "fit", args.seed, [features_path])
    print(f"fitted K={best[1].K} (bic={best[0]:.2f}) from {len(features)} events")


def cmd_sample(args) -> None:
    out = _out_dir(args)
    model_path = Path(args.model)
    if not model_path.exists():
        raise LaneDepError(f"model file not found: {model_path}")
    model = load_model(model_path)
    traces, report = sample_events(
        model,
        args.count,
        ts=args.ts,
        noise=not args.no_noise,
        seed=args.seed,
        n_gen=args.n_gen,
    )
    for i, trace in enumerate(traces):
        write_trace_csv(out / f"event_{i:05d}.csv", trace)
    _write_json(report.to_dict(), out / "report.json")
    _write_meta(out, "sample", args.seed, [model_path])
    print(
        f"sampled {len(traces)} events "
        f"(acceptance rate {report.acceptance_rate:.4f})"
    )


def cmd_simulate(args) -> None:
    out = _out_dir(args)
    files = _trace_files(args.events_dir)
    params, gains, _ = load_vehicle_config(args.config)
    criteria = EventFilterCriteria()

    def run(path: Path):
        trace = read_trace_csv(path)
        xi = extract_features(trace, criteria)
        return simulate_event(
            trace, xi, params=params, gains=gains, substeps=args.substeps
        )

    failures = []
    results = []
    for path in files:
        try:
            results.append((path, run(path)))
        except LaneDepError as exc:
            failures.append((path.name, type(exc).__name__, str(exc)))
            logger.info("skipping %s: %s", path.name, exc)
    for path, traj in results:
        with open(out / path.name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "y", "steer", "active"])
            for t, y, steer, active in zip(traj.t, traj.y, traj.steer, traj.active):
                writer.writerow([repr(float(t)), repr(float(y)), repr(float(steer)), int(active)])
    with open(out / "failures.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_REJECTION_HEADER)
        writer.writerows(failures)
    _write_meta(out, "simulate", None, files + _config_inputs(args))
    n_trig = sum(traj.triggered for _, traj in results)
    print(f"simulated {len(results)} events ({n_trig} triggered), skipped {len(failures)}")


def cmd_evaluate(args) -> None:
    out = _out_dir(args)
    files = _trace_files(args.events_dir)
    params, gains, _ = load_vehicle_config(args.config)
    traces = []
    names = []
    for path in files:
        traces.append(read_trace_csv(path))
        names.append(path.stem)
    report = evaluate_batch(
        traces,
        params=params,
        gains=gains,
        names=names,
        substeps=args.substeps,
        threads=args.threads,
    )
    _write_json(report.to_dict(), out / "report.json")
    write_running_mean_csv(report, out / "running_mean.csv")
    _write_meta(out, "evaluate", None, files + _config_inputs(args))
    for side in (Side.LEFT, Side.RIGHT):
        summ = report.summary(side)
        if summ is not None:
            print(
                f"{side.value}: n={summ.n_events} "
                f"mean S off/on = {summ.mean_s_off:.4f}/{summ.mean_s_on:.4f} "
                f"reduction {summ.reduction_pct:.2f}%"
            )
    if report.failures:
        print(f"skipped {len(report.failures)} events (see report.json)")


def _config_inputs(args) -> list[Path]:
    return [Path(args.config)] if getattr(args, "config", None) else []


def cmd_synth(args) -> None:
    out = _out_dir(args)
    inputs = []
    if args.spec:
        spec_path = Path(args.spec)
        spec = load_synth_spec(spec_path)
        inputs.append(spec_path)
    else:
        spec = default_synth_spec()
    if args.count is not None and args.count < 1:
        raise LaneDepError(f"corpus size must be at least 1, got {args.count}")

    if args.side == "both":
        mirror = spec.mirrored()
        specs = [(spec.side.value, spec), (mirror.side.value, mirror)]
    elif args.side is None or args.side == spec.side.value:
        specs = [(None, spec)]
    else:
        specs = [(None, spec.mirrored())]

    total = 0
    for offset, (subdir, side_spec) in enumerate(specs):
        base = out / subdir if subdir else out
        trace_dir = base / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)
        seed = (spec.seed if args.seed is None else args.seed) + offset
        traces, features = generate_corpus(side_spec, n=args.count, seed=seed)
        for i, trace in enumerate(traces):
            write_trace_csv(trace_dir / f"event_{i:05d}.csv", trace)
        write_features_csv(base / "features.csv", features)
        total += len(traces)
    _write_meta(out, "synth", spec.seed if args.seed is None else args.seed, inputs)
    print(f"generated {total} events")


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lanedep",
        description="Stochastic lane departure modeling and controller evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"lanedep {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="top-level random seed")
    common.add_argument("--config", default=None, help="vehicle/controller JSON config")
    common.add_argument("--threads", type=int, default=1, help="worker pool size")
    common.add_argument("--out", required=True, help="output directory")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("extract", parents=[common], help="reduce trace CSVs to feature rows")
    p.add_argument("trace_dir", help="directory of trace CSVs (t,y,v,rho)")
    p.add_argument("--side", choices=[s.value for s in Side], default=None,
                   help="override the inferred departure side")
    p.add_argument("--min-duration", type=float, default=0.5)
    p.add_argument("--max-duration", type=float, default=10.0)
    p.add_argument("--min-speed", type=float, default=5.0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", parents=[common], help="fit a bounded Gaussian mixture")
    p.add_argument("features", help="feature CSV from extract")
    p.add_argument("-K", "--k", default="10",
                   help="component count, or inclusive sweep like 1:8 (BIC picks)")
    p.add_argument("--side", choices=[s.value for s in Side], default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--cov-floor", type=float, default=1e-8,
                   help="eigenvalue floor for component covariances")
    p.add_argument("--moment-method", choices=[m.value for m in MomentMethod],
                   default=MomentMethod.CLOSED_FORM_DIAGONAL.value)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", parents=[common], help="sample events from a fitted model")
    p.add_argument("model", help="model JSON from fit")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--ts", type=float, default=0.1, help="trace sample period [s]")
    p.add_argument("--no-noise", action="store_true", help="noise-free trace synthesis")
    p.add_argument("--n-gen", type=int, default=DEFAULT_N_GEN,
                   help="raw draws per rejection batch")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", parents=[common],
                       help="replay events through the lane-keeping controller")
    p.add_argument("events_dir", help="directory of trace CSVs")
    p.add_argument("--substeps", type=int, default=10,
                   help="integrator substeps per trace sample")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", parents=[common],
                       help="compare departure area with the controller off and on")
    p.add_argument("events_dir", help="directory of trace CSVs")
    p.add_argument("--substeps", type=int, default=10)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", parents=[common],
                       help="generate a known-truth synthetic corpus")
    p.add_argument("spec", nargs="?", default=None,
                   help="ground-truth spec JSON (packaged default when omitted)")
    p.add_argument("--count", type=int, default=None, help="events per side")
    p.add_argument("--side", choices=["left", "right", "both"], default=None,
                   help="which side(s) to generate (default: the spec's side)")
    p.set_defaults(func=cmd_synth)

    return parser


def _default_seed(args) -> None:
    if getattr(args, "seed", None) is None:
        args.seed = 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.subcommand != "synth":
        _default_seed(args)
    try:
        args.func(args)
    except LaneDepError as exc:
        print(f"lanedep: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
