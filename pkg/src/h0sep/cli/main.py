"""``h0sep`` command line.

Exit codes: 0 success, 2 parse error (bad flags or malformed input file),
3 supervised metric requested without labels, 4 snapshot shape mismatch,
1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ..errors import H0SepError, MissingLabelsError, ShapeMismatchError, SnapshotFormatError
from ..homology import h0_normalized
from ..learners import FitConfig
from ..summaries import persistence_density, persistence_statistic
from ..synth import SynthConfig, make_classification
from ..toylab import run_toy, toy_dataset_config
from . import io
from .plots import write_density_evolution, write_metric_curves
from .report import REPORT_SCHEMA, TrackOptions, choose_metrics, separability_metrics, track_run

EXIT_OK, EXIT_OTHER, EXIT_PARSE, EXIT_LABELS, EXIT_SHAPE = 0, 1, 2, 3, 4


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _requested(args) -> tuple:
    flags = {"p_lt_t": args.p_lt_t, "ch": args.ch, "thornton": args.thornton, "roc_auc": args.roc_auc}
    return tuple(m for m, on in flags.items() if on)


def _track_options(args) -> TrackOptions:
    return TrackOptions(
        t=args.t, bins=args.bins, delta=getattr(args, "delta", 0.01),
        window=getattr(args, "window", 3), k=args.k, ch_k=args.ch_k, splits=args.splits,
        seed=args.seed, thornton_rule=args.thornton_rule,
        fit=FitConfig(lr=args.fit_lr, epochs=args.fit_epochs),
    )


# --------------------------------------------------------------------------
# commands

def cmd_gen(args) -> int:
    cfg = SynthConfig(
        n_samples=args.n, n_features=args.d, n_classes=args.classes,
        clusters_per_class=args.clusters_per_class, class_sep=args.class_sep, seed=args.seed,
    )
    pc = make_classification(cfg)
    io.write_snapshot(args.out, pc)
    counts = np.bincount(pc.labels, minlength=cfg.n_classes).tolist()
    digest = {"path": str(args.out), "n": pc.n, "d": pc.d, "classes": cfg.n_classes,
              "class_counts": counts, "seed": args.seed}
    sys.stdout.write(json.dumps(digest) + "\n")
    return EXIT_OK


def cmd_h0(args) -> int:
    pc = io.read_snapshot(args.snapshot)
    values = h0_normalized(pc).values
    density = persistence_density(values, args.bins)
    out = {
        "schema": REPORT_SCHEMA,
        "seed": args.seed,
        "n_points": pc.n,
        "n_bars": int(values.size),
        "t": args.t,
        "p_lt_t": persistence_statistic(values, args.t),
        "histogram": {"bin_edges": density.bin_edges.tolist(), "masses": density.masses.tolist()},
    }
    if args.values:
        out["normalized_persistences"] = values.tolist()
    _emit(dump_json(out), args.out)
    return EXIT_OK


def cmd_separability(args) -> int:
    pc = io.read_snapshot(args.snapshot)
    if args.labels:
        pc = io.attach_labels(pc, io.read_labels(args.labels), args.labels)
    opts = _track_options(args)
    metrics = choose_metrics(_requested(args), pc.labels is not None)
    values, _ = separability_metrics(pc, metrics, opts)
    reports = []
    for m in metrics:
        if m == "roc_auc":
            r = values["roc_auc"]
            reports.append({"name": f"roc_auc_{args.splits}", "value": r["mean"],
                            "ci_low": r["ci_low"], "ci_high": r["ci_high"]})
        elif m == "ch" and values.get("ch_infinite"):
            reports.append({"name": "ch", "value": None, "infinite": True})
        else:
            reports.append({"name": m, "value": values[m]})
    out = {"schema": REPORT_SCHEMA, "seed": args.seed, "n_points": pc.n,
           "labeled": pc.labels is not None, "parameters": {"t": args.t, "k": args.k,
           "ch_k": args.ch_k, "splits": args.splits}, "metrics": reports}
    _emit(dump_json(out), args.out)
    return EXIT_OK


def cmd_track(args) -> int:
    manifest = io.load_manifest(args.manifest)
    clouds = io.load_snapshots(manifest)
    epochs = [e for e, _ in manifest.epochs]
    report, samples = track_run(clouds, epochs, _track_options(args), _requested(args), manifest.run_id)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dump_json(report), encoding="utf-8")
    if args.plot:
        plot_dir = Path(args.plot_dir) if args.plot_dir else out.parent
        plot_dir.mkdir(parents=True, exist_ok=True)
        write_metric_curves(report, plot_dir)
        write_density_evolution(report, samples, plot_dir)
    summary = {"report": str(out), "epochs": len(epochs),
               "convergence_epoch": report["convergence_epoch"], "seed": args.seed}
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK


SUMMARY_FIELDS = [
    "variant", "dataset", "dataset_seed", "clusters_per_class", "class_sep",
    "final_epoch", "final_loss", "final_auc", "median_normalized_persistence",
    "p_lt_t", "manifest",
]


def cmd_toy(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    variants = {"both": (True, False), "on": (True,), "off": (False,)}[args.layer_norm]
    summary_rows, box_rows = [], []
    for i in range(args.datasets):
        synth = toy_dataset_config(
            args.seed + i, args.class_sep, args.clusters_per_class, args.n_samples, args.n_features
        )
        for ln in variants:
            variant = "layernorm" if ln else "plain"
            run = run_toy(synth, ln, args.epochs, args.lr)
            trace = run.trace
            run_dir = out_dir / f"{variant}_{i:03d}"
            run_dir.mkdir(exist_ok=True)
            keep = [e for e in trace.epochs if e % args.stride == 0 or e == trace.epochs[-1]]
            entries = []
            for e in keep:
                rel = f"epoch_{e:03d}.csv"
                io.write_snapshot(run_dir / rel, trace.clouds[e])
                entries.append((e, rel))
            manifest = io.SnapshotManifest(
                run_id=f"{variant}_{i:03d}", epochs=entries,
                metadata={"variant": variant, "dataset_seed": synth.seed,
                          "class_sep": synth.class_sep,
                          "clusters_per_class": synth.clusters_per_class,
                          "lr": args.lr, "epochs": args.epochs},
            )
            io.write_manifest(run_dir / "manifest.json", manifest)

            first = h0_normalized(trace.clouds[0]).values
            last = h0_normalized(trace.final).values
            summary_rows.append({
                "variant": variant, "dataset": i, "dataset_seed": synth.seed,
                "clusters_per_class": synth.clusters_per_class,
                "class_sep": repr(synth.class_sep), "final_epoch": trace.epochs[-1],
                "final_loss": repr(trace.losses[-1]), "final_auc": repr(trace.aucs[-1]),
                "median_normalized_persistence": repr(float(np.median(last))),
                "p_lt_t": repr(persistence_statistic(last, args.t)),
                "manifest": f"{run_dir.name}/manifest.json",
            })
            snapshots = {0: first, trace.epochs[-1]: last}
            for epoch, values in snapshots.items():
                box_rows.extend((variant, i, epoch, repr(float(v))) for v in values)

    with (out_dir / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(summary_rows)
    with (out_dir / "boxplot.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "dataset", "epoch", "normalized_persistence"])
        w.writerows(box_rows)
    sys.stdout.write(json.dumps({"out": str(out_dir), "runs": len(summary_rows), "seed": args.seed}) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="seed for every stochastic step (default 0)")


def _add_metric_flags(p):
    p.add_argument("--t", type=float, default=0.6, help="persistence threshold (default 0.6)")
    p.add_argument("--bins", type=_positive_int, default=50)
    p.add_argument("--k", type=_positive_int, default=5, help="Thornton neighbours (default 5)")
    p.add_argument("--ch-k", type=_positive_int, default=5, help="k-means clusters for CH (default 5)")
    p.add_argument("--splits", type=_positive_int, default=5, help="ROC-AUC folds (default 5)")
    p.add_argument("--thornton-rule", choices=("per_neighbor", "all_agree"), default="per_neighbor")
    p.add_argument("--fit-lr", type=float, default=0.1)
    p.add_argument("--fit-epochs", type=_nonneg_int, default=200)
    g = p.add_argument_group("metric selection (default: everything the data supports)")
    g.add_argument("--p-lt-t", action="store_true")
    g.add_argument("--ch", action="store_true")
    g.add_argument("--thornton", action="store_true")
    g.add_argument("--roc-auc", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="h0sep", description="Class separability from H0 persistence of embeddings."
    )
    parser.add_argument("--config", help="key = value file supplying defaults for any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic labeled dataset as a snapshot CSV")
    p.add_argument("--n", type=_positive_int, default=2000)
    p.add_argument("--d", type=_positive_int, default=40)
    p.add_argument("--classes", type=_positive_int, default=2)
    p.add_argument("--clusters-per-class", type=_positive_int, default=1)
    p.add_argument("--class-sep", type=float, default=1.0)
    p.add_argument("-o", "--out", default="dataset.csv")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("h0", help="H0 persistence summary of one snapshot")
    p.add_argument("snapshot")
    p.add_argument("--t", type=float, default=0.6)
    p.add_argument("--bins", type=_positive_int, default=50)
    p.add_argument("--values", action="store_true", help="include normalized persistences")
    p.add_argument("-o", "--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_h0)

    p = sub.add_parser("separability", help="separability metrics of one snapshot")
    p.add_argument("snapshot")
    p.add_argument("--labels", help="label CSV (header 'label') for an unlabeled snapshot")
    p.add_argument("-o", "--out", default=None)
    _add_metric_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_separability)

    p = sub.add_parser("track", help="per-epoch separability of a snapshot manifest")
    p.add_argument("manifest")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--window", type=_positive_int, default=3)
    p.add_argument("-o", "--out", default="run_report.json")
    p.add_argument("--plot", action="store_true", help="also write SVG figures and their CSVs")
    p.add_argument("--plot-dir", default=None)
    _add_metric_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("toy", help="run the toy LayerNorm / plain MLP experiment")
    p.add_argument("--layer-norm", choices=("both", "on", "off"), default="both")
    p.add_argument("--datasets", type=_positive_int, default=1)
    p.add_argument("--epochs", type=_nonneg_int, default=100)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--class-sep", type=float, default=0.5)
    p.add_argument("--clusters-per-class", type=_positive_int, default=None,
                   help="fixed clusters per class (default: drawn from 1-3 per dataset)")
    p.add_argument("--n-samples", type=_positive_int, default=2000)
    p.add_argument("--n-features", type=_positive_int, default=40)
    p.add_argument("--stride", type=_positive_int, default=1, help="write every n-th epoch snapshot")
    p.add_argument("--t", type=float, default=0.6)
    p.add_argument("-o", "--out", default="toy_runs")
    _add_common(p)
    p.set_defaults(func=cmd_toy)
    return parser


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SnapshotFormatError("expected 'key = value'", path, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = (value, lineno)
    return out


def _apply_config(parser: argparse.ArgumentParser, path) -> None:
    entries = read_config(path)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    known = set()
    for sp in subparsers.choices.values():
        actions = {a.dest: a for a in sp._actions}
        updates = {}
        for key, (value, lineno) in entries.items():
            action = actions.get(key)
            if action is None or key in ("help", "func"):
                continue
            known.add(key)
            if isinstance(action, argparse._StoreTrueAction):
                updates[key] = value.lower() in ("1", "true", "yes", "on")
                continue
            try:
                updates[key] = action.type(value) if action.type else value
            except (ValueError, argparse.ArgumentTypeError):
                raise SnapshotFormatError(f"bad value for {key}: {value!r}", path, lineno) from None
        sp.set_defaults(**updates)
    unknown = sorted(set(entries) - known)
    if unknown:
        raise SnapshotFormatError(f"unknown config keys: {', '.join(unknown)}", path)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            _apply_config(parser, known.config)
        args = parser.parse_args(argv)
        return args.func(args)
    except SnapshotFormatError as exc:
        print(f"h0sep: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except MissingLabelsError as exc:
        print(f"h0sep: missing labels: {exc}", file=sys.stderr)
        return EXIT_LABELS
    except ShapeMismatchError as exc:
        print(f"h0sep: shape mismatch: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (H0SepError, OSError) as exc:
        print(f"h0sep: error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
