"""Command-line front end: stream files through averagers, reproduce the
benchmark CSVs, and dump weight traces for auditing.

All output is plain UTF-8 CSV (header row, newline-terminated rows, ``.``
decimal point) so any external tool can plot it.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .averagers import AnytimeWindowAverage, GrowingExponentialAverage
from .experiment import (
    CONSTANT_ROSTER,
    DEFAULT_STEPSIZE,
    PROPORTIONAL_ROSTER,
    ExperimentConfig,
    default_problem,
    make_averager,
    run_experiment,
)
from .reference import RawTailAverage, WeightTracer

TRACE_MAX_STEPS = 10_000

KNOWN_AVERAGERS = ("true", "raw", "exp", "expk", "awa", "awa3", "awak", "truek")


class CliError(Exception):
    """Validated failure; printed as a one-line diagnostic with exit code 2."""


def _parse_vector_file(path: str) -> list[np.ndarray]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    samples = []
    dim = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            values = [float(tok) for tok in stripped.replace(",", " ").split()]
        except ValueError as exc:
            raise CliError(f"{path}: line {lineno}: {exc}") from exc
        vec = np.asarray(values)
        if not np.all(np.isfinite(vec)):
            raise CliError(f"{path}: line {lineno}: non-finite value")
        if dim is None:
            dim = vec.shape[0]
        elif vec.shape[0] != dim:
            raise CliError(
                f"{path}: line {lineno}: expected {dim} values, got {vec.shape[0]}"
            )
        samples.append(vec)
    return samples


def _open_writer(path: str):
    if path == "-":
        return sys.stdout, None
    try:
        handle = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc
    return handle, handle


def _fmt(value: float) -> str:
    return str(float(value))


def _build_cli_averager(args, horizon: int):
    if (args.k is None) == (args.c is None):
        raise CliError("exactly one of --k and --c is required")
    num_recent = None
    if args.z is not None:
        if args.z < 1:
            raise CliError("--z must be >= 1")
        num_recent = args.z
    try:
        return make_averager(
            args.averager, k=args.k, c=args.c, horizon=horizon, num_recent=num_recent
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _target_column(averager, t: int) -> float:
    if isinstance(averager, GrowingExponentialAverage):
        return averager.variance_target()
    if isinstance(averager, RawTailAverage):
        return float(max(averager.count, 1))
    return float(averager.schedule.target(t))


def _gamma_column(averager) -> float:
    if isinstance(averager, AnytimeWindowAverage):
        return float(averager.blend_weights()[0])
    return float(getattr(averager, "last_gamma", 0.0))


def cmd_average(args) -> int:
    samples = _parse_vector_file(args.input)
    averager = _build_cli_averager(args, horizon=max(len(samples), 1))
    handle, closer = _open_writer(args.out)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        dim = samples[0].shape[0] if samples else 0
        writer.writerow(["t", "k_t", "gamma"] + [f"est_{i}" for i in range(dim)] + ["n_eff"])
        for t, sample in enumerate(samples, start=1):
            averager.observe(sample)
            estimate = averager.estimate()
            if estimate is None:
                estimate = sample
            writer.writerow(
                [t, _fmt(_target_column(averager, t)), _fmt(_gamma_column(averager))]
                + [_fmt(v) for v in estimate]
                + [_fmt(averager.effective_sample_size())]
            )
    finally:
        if closer is not None:
            closer.close()
    return 0


def _experiment_jobs(args):
    if args.k is not None and args.c is not None:
        raise CliError("--k and --c are mutually exclusive")
    if args.k is not None:
        return [("constant", args.k)]
    if args.c is not None:
        return [("proportional", args.c)]
    # No schedule flag: the full default reproduction.
    return [("constant", 10), ("constant", 100), ("proportional", 0.25), ("proportional", 0.5)]


def _job_config(args, kind: str, value) -> ExperimentConfig:
    if args.averagers is not None:
        roster = tuple(tok.strip() for tok in args.averagers.split(",") if tok.strip())
        if not roster:
            raise CliError("--averagers is empty")
        for aid in roster:
            if aid not in KNOWN_AVERAGERS:
                raise CliError(
                    f"unknown averager {aid!r}; choose from {', '.join(KNOWN_AVERAGERS)}"
                )
    else:
        roster = CONSTANT_ROSTER if kind == "constant" else PROPORTIONAL_ROSTER
    try:
        return ExperimentConfig(
            problem=default_problem(),
            horizon=args.steps,
            num_runs=args.runs,
            stepsize=args.stepsize,
            averagers=roster,
            k=value if kind == "constant" else None,
            c=value if kind == "proportional" else None,
            base_seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def cmd_experiment(args) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out_dir}: {exc}") from exc
    for kind, value in _experiment_jobs(args):
        config = _job_config(args, kind, value)
        try:
            result = run_experiment(config)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        name = f"constant_k{value}.csv" if kind == "constant" else f"proportional_c{value:g}.csv"
        path = out_dir / name
        try:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["step"] + list(config.averagers))
                means = result.mean_curves
                for i, step in enumerate(result.steps):
                    writer.writerow([int(step)] + [_fmt(means[aid][i]) for aid in config.averagers])
        except OSError as exc:
            raise CliError(f"cannot write {path}: {exc}") from exc
        print(f"wrote {path}")
    return 0


def cmd_trace(args) -> int:
    if args.steps > TRACE_MAX_STEPS:
        raise CliError(f"--steps {args.steps} exceeds the trace limit of {TRACE_MAX_STEPS}")
    averager = _build_cli_averager(args, horizon=args.steps)
    try:
        tracer = WeightTracer(averager)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    handle, closer = _open_writer(args.out)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "i", "weight", "sum_weights", "sum_sq_weights", "inv_target"])
        zero = np.zeros(1)
        exp_family = args.averager in ("exp", "expk")
        for t in range(1, args.steps + 1):
            tracer.observe(zero)  # weights do not depend on sample values
            weights = tracer.weights()
            total, ssq = tracer.weight_sums()
            inv_target = 1.0 / _target_column(averager, t)
            # Exponential traces list every prior sample (weights may be exactly
            # zero on some steps); block-based ones list only the live samples.
            indices = range(t) if exp_family else np.nonzero(weights)[0]
            for i in indices:
                writer.writerow(
                    [t, int(i) + 1, _fmt(weights[i]), _fmt(total), _fmt(ssq), _fmt(inv_target)]
                )
    finally:
        if closer is not None:
            closer.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anytail",
        description="Constant-memory tail averaging: demos, benchmark CSVs, weight audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_schedule_flags(p):
        p.add_argument("--k", type=int, default=None, help="constant window size")
        p.add_argument("--c", type=float, default=None, help="window fraction in (0, 1)")
        p.add_argument("--z", type=int, default=None,
                       help="recent accumulators for awa ids (total slots = z + 1)")

    p_avg = sub.add_parser("average", help="stream a file of vectors through one averager")
    p_avg.add_argument("--input", required=True, help="text file, one vector per line")
    p_avg.add_argument("--averager", required=True, choices=KNOWN_AVERAGERS)
    add_schedule_flags(p_avg)
    p_avg.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p_avg.set_defaults(func=cmd_average)

    p_exp = sub.add_parser("experiment", help="run the regression benchmark and emit CSVs")
    p_exp.add_argument("--k", type=int, default=None, help="run a single constant-k schedule")
    p_exp.add_argument("--c", type=float, default=None, help="run a single proportional schedule")
    p_exp.add_argument("--steps", type=int, default=1000, help="batches per run")
    p_exp.add_argument("--runs", type=int, default=100, help="independent runs to average")
    p_exp.add_argument("--stepsize", type=float, default=DEFAULT_STEPSIZE)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--averagers", default=None,
                       help="comma list overriding the default roster")
    p_exp.add_argument("--out", default=".", help="output directory")
    p_exp.set_defaults(func=cmd_experiment)

    p_tr = sub.add_parser("trace", help="dump per-sample weights for one averager")
    p_tr.add_argument("--averager", required=True, choices=KNOWN_AVERAGERS)
    add_schedule_flags(p_tr)
    p_tr.add_argument("--steps", type=int, default=50)
    p_tr.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p_tr.set_defaults(func=cmd_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
