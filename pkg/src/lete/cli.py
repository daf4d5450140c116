"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every subcommand writes only under ``--output-dir`` and prints a
tab-separated summary to stdout.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, tasks
from .baselines import BaselineEncoder, BaselineKind, baseline_encode, lete_params_replicating_sin
from .combined import CombinedEncoder
from .spectral import EventSequence, analyze_batch
from .train import Model, TrainConfig, grad_check_report

logger = logging.getLogger("lete")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("csv", "json", "svg", "png")
GRADCHECK_KINDS = ("fourier", "fourier-diag", "spline", "lete", "ftr", "t2v", "unified_sin")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {s}")
    return v


def _ratio(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"split ratio must lie in [0, 1], got {s}")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output-dir", type=Path, default=Path("out"), help="directory for all outputs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--format", action="append", choices=FORMATS, dest="formats",
        help="output format; repeat for several (default: csv and json)",
    )


def _training(p: argparse.ArgumentParser, steps: int) -> None:
    p.add_argument("--steps", type=_positive_int, default=steps)
    p.add_argument("--lr", type=_positive_float, default=1e-2, help="Adam learning rate")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lete", description="Learnable time encodings: experiments and tools.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a 1-d target function with one encoder plus a linear decoder")
    _common(p)
    _training(p, 5000)
    p.add_argument("--encoder", choices=("fte", "fourier", "spline"), required=True)
    p.add_argument("--target", choices=sorted(tasks.TARGETS), default="sin")
    p.add_argument("--dim", type=_positive_int, default=1, help="encoding dimension (this task is 1-d)")
    p.add_argument("--p", type=_ratio, default=None, help="split ratio; implied by --encoder")
    p.add_argument("--grid-size", type=_positive_int, default=32)
    p.add_argument("--k-max", type=_positive_int, default=5)
    p.add_argument("--n-samples", type=_positive_int, default=200)

    p = sub.add_parser("reconstruct", help="reconstruct a seeded synthetic signal with several encoders")
    _common(p)
    _training(p, 2000)
    p.add_argument("--signal", choices=tasks.SIGNAL_KINDS, default="mixed")
    p.add_argument(
        "--encoders", default="fte,lete",
        help=f"comma-separated list from {','.join(tasks.ENCODER_KINDS)}",
    )
    p.add_argument("--dim", type=_positive_int, default=8)
    p.add_argument("--p", type=_ratio, default=0.5, help="Fourier share of the combined encoder")
    p.add_argument("--n", type=_positive_int, default=256, help="number of samples")
    p.add_argument("--window", type=_positive_float, default=128.0, help="time span of the signal")

    p = sub.add_parser("entropy", help="spectral entropy per node of an event CSV")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="CSV with header node_id,timestamp")
    src.add_argument(
        "--synthetic", type=_positive_int,
        help="generate this many seeded periodic and random event trains instead",
    )
    p.add_argument("--min-events", type=int, default=5, help="keep nodes with more than this many events")
    p.add_argument("--mode", choices=("values", "binned"), default="values")
    p.add_argument("--gaps", action="store_true", help="analyse inter-event gaps instead of timestamps")

    p = sub.add_parser("featmap", help="feature map and transfer-function listing of an encoder")
    _common(p)
    p.add_argument("--model", type=Path, help="model JSON; otherwise a fresh encoder is built")
    p.add_argument("--encoder", choices=("lete", "fourier", "spline", "ftr", "t2v", "unified_sin"), default="lete")
    p.add_argument("--dim", type=_positive_int, default=8)
    p.add_argument("--p", type=_ratio, default=0.5)
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--n-grid", type=_positive_int, default=200)
    p.add_argument("--digits", type=int, default=4, help="listing precision; negative for full precision")

    p = sub.add_parser("gradcheck", help="compare analytic and finite-difference gradients")
    _common(p)
    p.add_argument("--encoder", choices=GRADCHECK_KINDS, default="lete")
    p.add_argument("--dim", type=_positive_int, default=6)
    p.add_argument("--p", type=_ratio, default=0.5)
    p.add_argument("--h", type=float, default=1e-5, help="finite-difference step in [1e-7, 1e-3]")
    p.add_argument("--tol", type=_positive_float, default=1e-4)

    p = sub.add_parser("replicate-sin", help="check that LeTE parameters reproduce a plain sine encoding")
    _common(p)
    p.add_argument("--dim", type=_positive_int, default=8)
    p.add_argument("--n-times", type=_positive_int, default=1000)
    return parser


def parse_cli(argv=None) -> argparse.Namespace:
    """Parse and validate flags; raises :class:`UsageError` naming the offending flag."""
    args = build_parser().parse_args(argv)
    if not args.formats:
        args.formats = ["csv", "json"]
    if args.command == "fit":
        if args.dim != 1:
            raise UsageError(f"--dim: the fitting task is one-dimensional, got {args.dim}")
        implied = {"fourier": 1.0, "spline": 0.0}.get(args.encoder)
        if args.p is not None and implied is not None and args.p != implied:
            raise UsageError(f"--p: encoder {args.encoder} implies p={implied}, got {args.p}")
    elif args.command == "reconstruct":
        kinds = [k.strip() for k in args.encoders.split(",") if k.strip()]
        bad = [k for k in kinds if k not in tasks.ENCODER_KINDS]
        if not kinds or bad:
            raise UsageError(f"--encoders: unknown kinds {bad}; choose from {tasks.ENCODER_KINDS}")
        args.encoders = kinds
        if args.dim < 2:
            raise UsageError("--dim: reconstruction needs at least 2 dimensions")
        if args.n < 32:
            raise UsageError("--n: need at least 32 samples")
    elif args.command == "entropy":
        if args.min_events < 0:
            raise UsageError("--min-events must be non-negative")
    elif args.command == "featmap":
        if not args.t_max > args.t_min:
            raise UsageError("--t-max must exceed --t-min")
        if args.encoder == "ftr" and args.dim % 2:
            raise UsageError("--dim must be even for the ftr encoder")
    elif args.command == "gradcheck":
        if not 1e-7 <= args.h <= 1e-3:
            raise UsageError(f"--h must lie in [1e-7, 1e-3], got {args.h}")
        if args.encoder == "ftr" and args.dim % 2:
            raise UsageError("--dim must be even for the ftr encoder")
    return args


# ---------------------------------------------------------------------------
# subcommands


def _emit(rows: list[tuple]) -> None:
    for row in rows:
        print("\t".join(str(v) for v in row))


def _figure_paths(args, stem: str) -> list[Path]:
    return [args.output_dir / f"{stem}.{ext}" for ext in ("svg", "png") if ext in args.formats]


def cmd_fit(args) -> None:
    tf = tasks.TargetFunction(args.target, n_samples=args.n_samples)
    cfg = TrainConfig(steps=args.steps, learning_rate=args.lr, seed=args.seed)
    rep = tasks.run_fit(args.encoder, tf, cfg, grid_size=args.grid_size, k_max=args.k_max)
    stem = f"fit_{args.encoder}_{args.target}"
    if "json" in args.formats:
        io.write_json(args.output_dir / f"{stem}.json", rep.to_dict())
        io.save_model(args.output_dir / f"{stem}_model.json", rep.model, seed=args.seed)
    if "csv" in args.formats:
        io.write_csv(args.output_dir / f"{stem}.csv", ["x", "target", "fitted"], [rep.x, rep.target, rep.fitted])
    for path in _figure_paths(args, stem):
        from .plots import plot_fit

        plot_fit(path, rep.x, rep.target, rep.fitted, f"{args.encoder} on {args.target}")
    _emit([("encoder", "target", "final_mse", "oracle_mse"),
           (args.encoder, args.target, repr(rep.final_mse), repr(rep.oracle_mse))])


def cmd_reconstruct(args) -> None:
    signal = tasks.gen_signal(args.signal, n=args.n, seed=args.seed, window=args.window)
    cfg = TrainConfig(steps=args.steps, learning_rate=args.lr, seed=args.seed)
    reports = {k: tasks.run_reconstruction(k, signal, d=args.dim, cfg=cfg, p=args.p) for k in args.encoders}
    stem = f"reconstruct_{args.signal}"
    if "json" in args.formats:
        io.write_json(
            args.output_dir / f"{stem}.json",
            {"signal": signal.generator_spec, "results": {k: r.to_dict() for k, r in reports.items()}},
        )
        for k, r in reports.items():
            io.save_model(args.output_dir / f"{stem}_{k}_model.json", r.model, seed=args.seed)
    if "csv" in args.formats:
        io.write_csv(
            args.output_dir / f"{stem}.csv",
            ["t", "signal", *args.encoders],
            [signal.t_grid, signal.values, *(r.fitted for r in reports.values())],
        )
    for path in _figure_paths(args, stem):
        from .plots import plot_reconstruction

        plot_reconstruction(path, signal.t_grid, signal.values, {k: r.fitted for k, r in reports.items()}, args.signal)
    _emit([("encoder", "signal", "final_mse")] + [(k, args.signal, repr(r.final_mse)) for k, r in reports.items()])


def synthetic_event_trains(count: int, seed: int, n_events: int = 64) -> list[EventSequence]:
    """``count`` periodic trains (repeating gap pattern) and ``count`` Poisson trains."""
    rng = np.random.default_rng(seed)
    seqs = []
    for i in range(count):
        pattern = rng.uniform(0.5, 4.0, int(rng.integers(2, 5)))
        gaps = np.resize(pattern, n_events - 1)
        seqs.append(EventSequence(np.concatenate([[0.0], np.cumsum(gaps)]), f"periodic_{i}"))
    for i in range(count):
        seqs.append(EventSequence(np.cumsum(rng.exponential(1.0, n_events)), f"random_{i}"))
    return seqs


def cmd_entropy(args) -> None:
    if args.input is not None:
        seqs = io.read_event_csv(args.input, args.min_events)
    else:
        seqs = [s for s in synthetic_event_trains(args.synthetic, args.seed) if len(s) > args.min_events]
    rows = analyze_batch(seqs, use_diffs=args.gaps, mode=args.mode)
    if "csv" in args.formats:
        io.write_csv(
            args.output_dir / "entropy.csv", ["node_id", "n_events", "entropy"],
            [[r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows]],
        )
    ent = np.array([r[2] for r in rows])
    if "json" in args.formats:
        summary = {"n_nodes": len(rows), "mode": args.mode, "gaps": args.gaps, "min_events": args.min_events}
        if rows:
            summary.update(mean=float(ent.mean()), median=float(np.median(ent)), min=float(ent.min()), max=float(ent.max()))
        io.write_json(args.output_dir / "entropy.json", summary)
    if rows:
        for path in _figure_paths(args, "entropy_density"):
            from .plots import plot_entropy_density

            plot_entropy_density(path, ent)
    _emit([("node_id", "n_events", "entropy")] + [(r[0], r[1], repr(r[2])) for r in rows])


def _fresh_encoder(kind: str, d: int, p: float, seed: int):
    if kind in ("ftr", "t2v", "unified_sin"):
        return BaselineEncoder.init(kind, d)
    ratio = {"lete": p, "fourier": 1.0, "spline": 0.0}[kind]
    return CombinedEncoder.init(d, p=ratio, rng=seed)


def cmd_featmap(args) -> None:
    if args.model is not None:
        loaded = io.load_model(args.model)
        encoder = loaded.encoder if isinstance(loaded, Model) else loaded
    else:
        encoder = _fresh_encoder(args.encoder, args.dim, args.p, args.seed)
    t = np.linspace(args.t_min, args.t_max, args.n_grid)
    fm = tasks.export_feature_map(encoder, t)
    curves = tasks.reconstruct_transfer_functions(encoder, t)
    listing = tasks.format_listing(encoder, curves, None if args.digits < 0 else args.digits)
    (args.output_dir / "transfer_listing.txt").write_text(listing + "\n")
    if "csv" in args.formats:
        header = ["t"] + [f"dim_{i}" for i in range(fm.shape[1])]
        io.write_csv(args.output_dir / "featmap.csv", header, [t, *fm.T])
        io.write_csv(args.output_dir / "transfer_curves.csv", header, [t, *(c.values for c in curves)])
    if "json" in args.formats and args.model is None:
        io.save_model(args.output_dir / "encoder.json", encoder, seed=args.seed)
    for path in _figure_paths(args, "featmap"):
        from .plots import plot_feature_map

        plot_feature_map(path, t, fm)
    for path in _figure_paths(args, "transfer_functions"):
        from .plots import plot_transfer_functions

        plot_transfer_functions(path, curves)
    print(listing)


def gradcheck_model(kind: str, d: int, p: float, seed: int) -> tuple[Model, tuple]:
    rng = np.random.default_rng(seed)
    if kind in ("ftr", "t2v", "unified_sin"):
        enc = BaselineEncoder.init(kind, d)
        enc.omega[:] = rng.uniform(0.2, 2.0, enc.omega.size)
    else:
        ratio = {"fourier": 1.0, "fourier-diag": 1.0, "spline": 0.0, "lete": p}[kind]
        enc = CombinedEncoder.init(d, p=ratio, diagonal_only=kind == "fourier-diag", rng=rng)
        enc.lm.omega[:] = rng.uniform(0.2, 1.5, d)
        enc.lm.phi[:] = rng.uniform(-0.5, 0.5, d)
    t = rng.uniform(-1.5, 1.5, 16)
    y = np.sin(2 * t) + 0.1 * t
    return Model(enc, rng=rng), (t, y)


def cmd_gradcheck(args) -> None:
    model, batch = gradcheck_model(args.encoder, args.dim, args.p, args.seed)
    report = grad_check_report(model, batch, args.h)
    worst = max(err for err, _ in report.values())
    if "json" in args.formats:
        io.write_json(
            args.output_dir / "gradcheck.json",
            {"encoder": args.encoder, "dim": args.dim, "h": args.h, "max_rel_error": worst,
             "per_parameter": {k: {"error": e, "index": list(i)} for k, (e, i) in report.items()}},
        )
    if "csv" in args.formats:
        names = sorted(report)
        io.write_csv(args.output_dir / "gradcheck.csv", ["parameter", "rel_error"], [names, [report[n][0] for n in names]])
    _emit([("parameter", "rel_error")] + [(k, repr(e)) for k, (e, _) in sorted(report.items())])
    if worst > args.tol:
        raise FloatingPointError(f"gradient check failed: max relative error {worst:.3g} > {args.tol:g}")


def cmd_replicate_sin(args) -> None:
    rng = np.random.default_rng(args.seed)
    omega = rng.uniform(-5.0, 5.0, args.dim)
    phi = rng.uniform(-np.pi, np.pi, args.dim)
    t = rng.uniform(-10.0, 10.0, args.n_times)
    ref = baseline_encode(t, BaselineEncoder(BaselineKind.UNIFIED_SIN, omega, phi))
    got = lete_params_replicating_sin(omega, phi)(t)
    err = float(np.max(np.abs(got - ref)))
    if "json" in args.formats:
        io.write_json(args.output_dir / "replicate_sin.json", {"dim": args.dim, "n_times": args.n_times, "max_abs_error": err})
    if "csv" in args.formats:
        io.write_csv(args.output_dir / "replicate_sin.csv", ["omega", "phi"], [omega, phi])
    _emit([("dim", "n_times", "max_abs_error"), (args.dim, args.n_times, repr(err))])


COMMANDS = {
    "fit": cmd_fit,
    "reconstruct": cmd_reconstruct,
    "entropy": cmd_entropy,
    "featmap": cmd_featmap,
    "gradcheck": cmd_gradcheck,
    "replicate-sin": cmd_replicate_sin,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = parse_cli(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        logger.setLevel(logging.INFO)
    try:
        args.output_dir.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args)
    except FloatingPointError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
