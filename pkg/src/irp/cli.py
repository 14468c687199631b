"""Command-line entry point: ``irp {synth,translate,sweep,stitch,rescale,stats}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every command writes a ``key = value`` manifest next to its main output.
Wall-clock timings go to the log only, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import __version__
from .anchors import ParallelAnchors
from .classify import Activation, load_model, predict, save_model
from .errors import DataError, IrpError, NumericalError
from .experiments import MODES, log_alphas, rescale_sweep, scale_benchmark, split_indices, stitch
from .fileio import (
    FLAG_LABELS,
    default_manifest_path,
    file_digest,
    read_embeddings,
    read_ints,
    write_csv,
    write_embeddings,
    write_ints,
    write_manifest,
)
from .spaces import compute_stats, norm_summary
from .synth import generate_family, materialize
from .translator import DEFAULT_DELTA, DEFAULT_OMEGA, TranslationConfig, sweep, translate

log = logging.getLogger("irp")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

# Files hold float32, so singular values below ~1e-7 relative are rounding
# noise; the library default of 1e-10 would invert them.
FILE_CUTOFF = 1e-5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _path_list(text):
    return [p for p in text.split(",") if p]


def _load(path, what):
    if not os.path.exists(path):
        raise DataError(f"{what} file not found: {path}")
    try:
        return read_embeddings(path)
    except DataError as exc:
        raise type(exc)(f"{what}: {exc}") from exc


def _load_ints(path, what):
    if not os.path.exists(path):
        raise DataError(f"{what} file not found: {path}")
    return read_ints(path)


def _digests(paths):
    return {f"digest.{name}": file_digest(p) for name, p in paths.items() if p}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])


# -- anchors / translation inputs ----------------------------------------------

def _add_anchor_args(p):
    p.add_argument("--source", required=True, help="source-space embeddings to translate")
    p.add_argument("--target", help="target-space embeddings (anchor rows are taken from it)")
    p.add_argument("--anchor-index", help="anchor row indices shared by --source and --target")
    p.add_argument("--source-anchors", help="explicit source anchor matrix")
    p.add_argument("--target-anchors", help="explicit target anchor matrix")
    p.add_argument("--reference", help="true target-space rows for --source, for similarity")
    p.add_argument("--cutoff", type=float, default=FILE_CUTOFF)
    p.add_argument("--prune-on", choices=["source", "target"], default="source")
    p.add_argument("--completion", action="store_true", help="use anchor completion")


def _resolve_anchors(args, X):
    if args.source_anchors or args.target_anchors:
        if not (args.source_anchors and args.target_anchors):
            raise UsageError("--source-anchors and --target-anchors must be given together")
        A_x = _load(args.source_anchors, "source anchors")
        A_y = _load(args.target_anchors, "target anchors")
    else:
        if not (args.anchor_index and args.target):
            raise UsageError("give --anchor-index with --target, or --source-anchors and --target-anchors")
        idx = _load_ints(args.anchor_index, "anchor index")
        Y = _load(args.target, "target")
        for name, M in (("source", X), ("target", Y)):
            if idx.size and (idx.min() < 0 or idx.max() >= M.shape[0]):
                raise DataError(f"anchor index {args.anchor_index}: out of range for {name} with {M.shape[0]} rows")
        A_x, A_y = X[idx], Y[idx]
    try:
        return ParallelAnchors({"source": A_x, "target": A_y})
    except DataError as exc:
        raise type(exc)(f"anchors: {exc}") from exc


def _input_paths(args):
    return {
        "source": args.source,
        "target": args.target,
        "anchor_index": args.anchor_index,
        "source_anchors": args.source_anchors,
        "target_anchors": args.target_anchors,
        "reference": args.reference,
    }


def cmd_translate(args):
    X = _load(args.source, "source")
    anchors = _resolve_anchors(args, X)
    reference = _load(args.reference, "reference") if args.reference else None
    config = TranslationConfig(
        omega=args.omega,
        delta=args.delta,
        master_seed=args.seed,
        use_completion=args.completion,
        cutoff_ratio=args.cutoff,
        prune_on=args.prune_on,
    )
    try:
        Y, report = translate(X, anchors, "source", "target", config, reference)
    except IrpError as exc:
        raise type(exc)(f"translating {args.source}: {exc}") from exc
    log.info("translated %d rows in %.3fs", X.shape[0], report.elapsed)
    write_embeddings(args.output, Y)
    entries = {
        "command": "translate",
        "omega": config.omega,
        "delta": config.delta,
        "seed": config.master_seed,
        "cutoff": config.cutoff_ratio,
        "prune_on": config.prune_on.value,
        "completion": config.use_completion,
        **_digests(_input_paths(args)),
        "output": os.path.basename(args.output),
        "digest.output": file_digest(args.output),
        "rows": X.shape[0],
        "source_dim": X.shape[1],
        "target_dim": Y.shape[1],
        "output_scale": report.output_scale,
        "anchor_residual": report.anchor_residual,
        "anchors_after_pruning": report.anchors_after_pruning,
        "per_subspace_condition": [float(c) for c in report.per_subspace_condition],
        "reconstruction_similarity": report.reconstruction_similarity,
    }
    write_manifest(args.manifest or default_manifest_path(args.output), entries)
    if report.reconstruction_similarity is not None:
        print(f"reconstruction_similarity = {report.reconstruction_similarity:.6f}")


def cmd_sweep(args):
    X = _load(args.source, "source")
    anchors = _resolve_anchors(args, X)
    reference = _load(args.reference, "reference") if args.reference else None
    classifier = labels = None
    if args.head or args.labels:
        if not (args.head and args.labels):
            raise UsageError("--head and --labels must be given together")
        model = load_model(args.head)
        labels = _load_ints(args.labels, "labels")
        classifier = lambda Y: predict(model, Y)  # noqa: E731
    result = sweep(
        X, anchors, "source", "target", args.omegas, args.deltas, reference, args.seeds,
        classifier, labels, args.completion, args.cutoff, args.prune_on,
    )
    rows = []
    for r in result.rows:
        rep = r.report
        rows.append([
            r.omega, float(r.delta), r.seed, rep.reconstruction_similarity, r.accuracy,
            rep.mean_condition, rep.mean_anchors,
            ";".join(repr(float(c)) for c in rep.per_subspace_condition),
            ";".join(str(c) for c in rep.anchors_after_pruning),
            rep.output_scale, rep.anchor_residual,
        ])
    _write_rows(
        args.output,
        ["omega", "delta", "seed", "reconstruction_similarity", "accuracy", "mean_condition",
         "mean_anchors", "per_subspace_condition", "anchors_after_pruning", "output_scale", "anchor_residual"],
        rows,
    )
    entries = {
        "command": "sweep",
        "omegas": args.omegas,
        "deltas": args.deltas,
        "seeds": args.seeds,
        "cutoff": args.cutoff,
        "prune_on": args.prune_on,
        "completion": args.completion,
        **_digests({**_input_paths(args), "head": args.head, "labels": args.labels}),
        "cells": len(result.rows),
        "digest.output": file_digest(args.output),
    }
    for key, value in result.correlations.items():
        entries[f"pearson.{key}"] = value
    write_manifest(args.manifest or default_manifest_path(args.output), entries)
    for key, value in result.correlations.items():
        print(f"pearson.{key} = {value}")


def cmd_synth(args):
    if not args.dims:
        raise UsageError("--dims needs at least one dimension")
    family = generate_family(
        args.n, args.d0, args.dims, sigma=args.sigma, num_classes=args.classes,
        k_anchors=args.anchors, seed=args.seed, ambient_sigma=args.ambient_sigma,
    )
    os.makedirs(args.out, exist_ok=True)
    ext = ".csv" if args.format == "csv" else ".irp"
    written = {}
    for i in range(len(family)):
        X, _, _ = materialize(family, i)
        path = os.path.join(args.out, f"space{i}{ext}")
        if args.format == "csv":
            write_csv(path, X)
        else:
            write_embeddings(path, X, flags=FLAG_LABELS if family.labels is not None else 0)
        written[f"space{i}"] = path
    written["anchors"] = os.path.join(args.out, "anchors.txt")
    write_ints(written["anchors"], family.anchor_indices)
    labels = family.labels if family.labels is not None else np.zeros(family.n, dtype=np.int64)
    written["labels"] = os.path.join(args.out, "labels.txt")
    write_ints(written["labels"], labels)
    entries = {
        "command": "synth",
        "n": args.n,
        "d0": args.d0,
        "dims": args.dims,
        "sigma": args.sigma,
        "ambient_sigma": args.ambient_sigma,
        "classes": args.classes,
        "anchors": args.anchors,
        "seed": args.seed,
        "scales": list(family.scales),
    }
    for name, path in written.items():
        entries[f"file.{name}"] = os.path.basename(path)
        entries[f"digest.{name}"] = file_digest(path)
    write_manifest(os.path.join(args.out, "manifest.txt"), entries)
    print(f"wrote {len(written)} files to {args.out}")


def cmd_stitch(args):
    spaces = [_load(p, f"space {i}") for i, p in enumerate(args.spaces)]
    labels = _load_ints(args.labels, "labels")
    idx = _load_ints(args.anchor_index, "anchor index")
    for p, X in zip(args.spaces, spaces):
        if X.shape[0] != labels.shape[0]:
            raise DataError(f"{p}: {X.shape[0]} rows but {labels.shape[0]} labels")
    config = TranslationConfig(omega=args.omega, delta=args.delta, master_seed=args.seed, cutoff_ratio=args.cutoff)
    result = stitch(spaces, labels, idx, config, test_fraction=args.test_fraction, seed=args.seed, epochs=args.epochs)
    _write_rows(
        args.output,
        ["mode", "encoder", "head", "encoder_dim", "head_dim", "accuracy", "similarity", "mean_condition", "mean_anchors"],
        [[r.mode, r.encoder, r.head, r.encoder_dim, r.head_dim, r.accuracy, r.similarity,
          r.mean_condition, r.mean_anchors] for r in result.rows],
    )
    if args.save_heads:
        os.makedirs(args.save_heads, exist_ok=True)
        for i, head in enumerate(result.heads):
            save_model(head, os.path.join(args.save_heads, f"head{i}.bin"))
    entries = {
        "command": "stitch",
        "omega": args.omega,
        "delta": args.delta,
        "seed": args.seed,
        "cutoff": args.cutoff,
        "epochs": args.epochs,
        "test_fraction": args.test_fraction,
        **_digests({f"space{i}": p for i, p in enumerate(args.spaces)}),
        **_digests({"labels": args.labels, "anchor_index": args.anchor_index}),
        "test_rows": int(result.test_indices.size),
        "digest.output": file_digest(args.output),
    }
    for mode in MODES:
        entries[f"mean_accuracy.{mode}"] = result.mean_accuracy(mode)
    entries["mean_similarity.zero-shot"] = result.mean_similarity()
    write_manifest(args.manifest or default_manifest_path(args.output), entries)
    for mode in MODES:
        print(f"{mode}: {result.mean_accuracy(mode):.4f}")


def cmd_rescale(args):
    if args.embeddings:
        if not args.labels:
            raise UsageError("--embeddings needs --labels")
        X = _load(args.embeddings, "embeddings")
        y = _load_ints(args.labels, "labels")
        if y.shape[0] != X.shape[0]:
            raise DataError(f"{args.embeddings}: {X.shape[0]} rows but {y.shape[0]} labels")
        train, test = split_indices(X.shape[0], np.array([], dtype=np.int64), args.test_fraction, args.seed)
        X_train, y_train, X_test, y_test = X[train], y[train], X[test], y[test]
    else:
        X_train, y_train = scale_benchmark(args.n_train, args.dim, args.classes, seed=args.seed)
        X_test, y_test = scale_benchmark(args.n_test, args.dim, args.classes, seed=args.seed + 1)
    mean_scale = float(np.linalg.norm(X_train, axis=1).mean())
    alphas = log_alphas(mean_scale, args.decades, args.points)
    rows, _ = rescale_sweep(
        X_train, y_train, X_test, y_test, args.activations, alphas,
        epochs=args.epochs, learning_rate=args.learning_rate, seed=args.seed,
    )
    _write_rows(
        args.output,
        ["activation", "alpha", "relative_alpha", "accuracy"],
        [[r.activation, r.alpha, r.relative_alpha, r.accuracy] for r in rows],
    )
    entries = {
        "command": "rescale",
        "activations": args.activations,
        "points": args.points,
        "decades": args.decades,
        "epochs": args.epochs,
        "learning_rate": args.learning_rate,
        "seed": args.seed,
        **_digests({"embeddings": args.embeddings, "labels": args.labels}),
        "mean_scale": mean_scale,
        "digest.output": file_digest(args.output),
    }
    for act in args.activations:
        accs = [r.accuracy for r in rows if r.activation == act]
        entries[f"accuracy_range.{act}"] = max(accs) - min(accs)
    write_manifest(args.manifest or default_manifest_path(args.output), entries)


def cmd_stats(args):
    X = _load(args.input, "input")
    summary = norm_summary(X, bins=args.bins)
    _write_rows(
        args.output,
        ["bin_low", "bin_high", "count"],
        [[float(lo), float(hi), int(c)] for lo, hi, c in zip(summary.edges[:-1], summary.edges[1:], summary.counts)],
    )
    entries = {
        "command": "stats",
        "bins": args.bins,
        **_digests({"input": args.input, "anchor_index": args.anchor_index}),
        "rows": X.shape[0],
        "dim": X.shape[1],
        "norm_min": summary.min,
        "norm_max": summary.max,
        "norm_mean": summary.mean,
        "norm_std": summary.std,
        "relative_spread": summary.relative_spread,
        "unimodal": summary.is_unimodal(),
    }
    if args.anchor_index:
        idx = _load_ints(args.anchor_index, "anchor index")
        stats = compute_stats(X[idx])
        entries["anchor_mean_norm"] = stats.mean_norm
    write_manifest(args.manifest or default_manifest_path(args.output), entries)
    for key in ("norm_mean", "norm_std", "relative_spread", "unimodal"):
        print(f"{key} = {entries[key]}")


def build_parser():
    parser = _Parser(prog="irp", description="Zero-shot latent space translation via inverse relative projection.")
    parser.add_argument("--version", action="version", version=f"irp {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic family of related spaces")
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--d0", type=int, default=32)
    p.add_argument("--dims", type=_int_list, default=[48, 64])
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--ambient-sigma", type=float, default=0.0)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--anchors", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["bin", "csv"], default="bin")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("translate", help="translate embeddings into a target space")
    _add_anchor_args(p)
    p.add_argument("--omega", type=int, default=DEFAULT_OMEGA)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("sweep", help="translate over an omega x delta grid")
    _add_anchor_args(p)
    p.add_argument("--omegas", type=_int_list, default=[1, 2, 4, 8, 16])
    p.add_argument("--deltas", type=_float_list, default=[0.5, 0.6, 0.7, 0.8, 0.9])
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--head", help="trained model blob scoring the translated rows")
    p.add_argument("--labels", help="labels of the --source rows")
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stitch", help="zero-shot stitching table over all (encoder, head) pairs")
    p.add_argument("--spaces", type=_path_list, required=True, help="comma-separated space files")
    p.add_argument("--labels", required=True)
    p.add_argument("--anchor-index", required=True)
    p.add_argument("--omega", type=int, default=DEFAULT_OMEGA)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--cutoff", type=float, default=FILE_CUTOFF)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--save-heads", help="directory for the trained head blobs")
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("rescale", help="accuracy under rescale injection per activation")
    p.add_argument("--embeddings", help="embeddings to use instead of the built-in benchmark")
    p.add_argument("--labels")
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--activations", type=lambda s: [Activation(a).value for a in s.split(",")],
                   default=[a.value for a in Activation])
    p.add_argument("--points", type=int, default=17)
    p.add_argument("--decades", type=float, default=1.0, help="sweep spans mean_scale * 10**(+/-decades)")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("stats", help="row-norm histogram of an embedding file")
    p.add_argument("--input", required=True)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--anchor-index", help="also report the anchors' mean centered norm")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; stats is deterministic")
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"irp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"irp {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"irp {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # configuration values rejected by the library (e.g. delta outside [0, 1))
        print(f"irp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
