"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bench import (
    METHODS,
    BenchError,
    ConfigError,
    RunConfig,
    extract_vectors,
    features_csv,
    parse_config,
    read_features_csv,
    read_manifest,
    run_bench,
    synth_dataset,
)
from .best_basis import DEFAULT_NOISE_CUTOFF, select_best_basis
from .classifier import ClassifierError, as_arrays, loocv
from .image_core import read_pgm_file
from .wavelet import dump_subbands

log = logging.getLogger("fdwp")


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdwp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fdwp {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a labeled fBm PGM dataset and manifest")
    s.add_argument("--classes", type=_float_list, required=True, help="comma-separated Hurst values")
    s.add_argument("--per-class", type=int, required=True)
    s.add_argument("--size", type=int, default=128)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    d = sub.add_parser("decompose", help="best-basis trace report for one PGM image")
    d.add_argument("image")
    d.add_argument("--criterion", choices=("fd", "energy"), default="fd")
    d.add_argument("--max-level", type=int, default=3)
    d.add_argument("--lambda", dest="lam", type=float, default=0.0)
    d.add_argument("--noise-cutoff", type=float, nargs="?", const=DEFAULT_NOISE_CUTOFF, default=None,
                   help=f"stop when all scores reach this value (bare flag: {DEFAULT_NOISE_CUTOFF})")
    d.add_argument("--fd-max-distance", type=int, default=None)
    d.add_argument("--dump-subbands", metavar="DIR", default=None,
                   help="also write every computed level's subbands as rescaled PGMs")
    d.add_argument("--out", default=None, help="report path (default: stdout)")

    e = sub.add_parser("extract", help="feature CSV for every image in a manifest")
    e.add_argument("--manifest", required=True)
    e.add_argument("--method", choices=METHODS, default="BBS_FD")
    e.add_argument("--max-level", type=int, default=3)
    e.add_argument("--lambda", dest="lam", type=float, default=0.0)
    e.add_argument("--mode", choices=("selected", "all"), default="selected")
    e.add_argument("--noise-cutoff", type=float, nargs="?", const=DEFAULT_NOISE_CUTOFF, default=None)
    e.add_argument("--glcm-levels", type=int, default=16)
    e.add_argument("--glcm-distance", type=int, default=1)
    e.add_argument("--fd-max-distance", type=int, default=None)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out", required=True)

    l = sub.add_parser("loocv", help="leave-one-out naive Bayes report for a feature CSV")
    l.add_argument("--features", required=True)
    l.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="run the level sweep and lambda run from a config file")
    b.add_argument("--config", required=True)
    b.add_argument("--workers", type=int, default=None, help="override the config's worker count")
    return p


def _write(path: str, text: str) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)


def cmd_synth(args) -> None:
    if any(not 0 < h < 1 for h in args.classes):
        raise UsageError("--classes values must lie in (0, 1)")
    manifest = synth_dataset(args.out, args.classes, args.per_class, args.size, args.seed)
    log.info("wrote %d images and %s", len(args.classes) * args.per_class, manifest)


def cmd_decompose(args) -> None:
    if not 1 <= args.max_level <= 8:
        raise UsageError("--max-level must be in 1..8")
    if args.lam < 0:
        raise UsageError("--lambda must be >= 0")
    img = read_pgm_file(args.image)
    trace = select_best_basis(img, args.criterion, args.max_level, args.lam, args.noise_cutoff,
                              fd_max_distance=args.fd_max_distance, keep_subbands=bool(args.dump_subbands))
    if args.dump_subbands:
        stem = Path(args.image).stem
        for sub in trace.subbands:
            dump_subbands(sub, args.dump_subbands, stem)
    report = f"# image={args.image}\n" + trace.report()
    if args.out:
        _write(args.out, report)
    else:
        sys.stdout.write(report)


def cmd_extract(args) -> None:
    cfg = RunConfig(manifest=args.manifest, methods=(args.method,), max_level=args.max_level, lam=args.lam,
                    mode=args.mode, noise_cutoff=args.noise_cutoff, glcm_levels=args.glcm_levels,
                    glcm_distance=args.glcm_distance, fd_max_distance=args.fd_max_distance,
                    workers=args.workers)
    cfg.validate()
    entries = read_manifest(cfg.manifest, min_classes=1, min_per_class=1)
    _write(args.out, features_csv(extract_vectors(entries, args.method, cfg)))


def cmd_loocv(args) -> None:
    try:
        text = Path(args.features).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.features}: {exc}") from None
    vectors = read_features_csv(text)
    X, y, names = as_arrays(vectors)
    report = loocv(X, y, names)
    _write(args.out, report.to_json({"features": Path(args.features).name, "n_features": len(names)}))
    sys.stdout.write(report.table())


def cmd_bench(args) -> None:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config(text, base_dir=path.parent)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers).validate()
    result = run_bench(cfg)
    for method, r in result.methods.items():
        sys.stdout.write(f"{method}: best level {r.best_level} "
                         f"accuracy {r.per_level[r.best_level].overall_accuracy:.4f}; "
                         f"lambda run {r.threshold.overall_accuracy:.4f}\n")


COMMANDS = {
    "synth": cmd_synth,
    "decompose": cmd_decompose,
    "extract": cmd_extract,
    "loocv": cmd_loocv,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except (UsageError, ConfigError, ClassifierError) as exc:
        print(f"fdwp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except BenchError as exc:
        print(f"fdwp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, ArithmeticError) as exc:
        where = getattr(args, "image", None) or getattr(args, "manifest", None) or ""
        print(f"fdwp {args.command}: error: {where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
