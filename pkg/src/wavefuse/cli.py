"""Command-line front end.

Subcommands: decompose, fuse, synth, train, evaluate. Exit codes: 0 on
success, 1 on usage errors, 2 on data errors (bad files, bad dims, bad
dataset layout), 3 on numeric failure (training divergence).
"""

from __future__ import annotations

import argparse
import sys

from .errors import DataError, NumericError
from .fusion import FusionPolicy, FusionRule, fuse_images
from .imgio import load_image, save_image
from .pipeline import (
    MODALITIES,
    PipelineConfig,
    evaluate,
    format_report,
    generate_synthetic_dataset,
    ingest_dataset,
    load_model,
    save_model,
    save_report,
    train_pipeline,
)
from .wavelet import WaveletKind, decompose, export_tree


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; this maps that to 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _pca_k(text: str):
    if text.lower() == "auto":
        return "auto"
    return int(text)


def _add_wavelet_args(p):
    p.add_argument("--wavelet", choices=[k.value for k in WaveletKind], default="db2")
    p.add_argument("--levels", type=int, default=5)


def _add_rule_args(p):
    rules = [r.value for r in FusionRule]
    p.add_argument("--approx-rule", choices=rules, default="maxabs")
    p.add_argument("--detail-rule", choices=rules, default="minabs")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wavefuse",
        description="Fuse thermal/visual image pairs in the wavelet domain and "
        "run the eigenface + MLP recognition pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("decompose", help="export one image's wavelet coefficient tree")
    p.add_argument("--input", required=True)
    _add_wavelet_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("fuse", help="fuse a thermal/visual pair into one image")
    p.add_argument("--thermal", required=True)
    p.add_argument("--visual", required=True)
    _add_wavelet_args(p)
    _add_rule_args(p)
    p.add_argument("--out", required=True, help="output PGM path")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("synth", help="generate a synthetic paired dataset")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--rows", type=int, default=64)
    p.add_argument("--cols", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a recognition model on a dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--split", type=float, default=0.5, help="train fraction per class")
    _add_wavelet_args(p)
    _add_rule_args(p)
    p.add_argument("--pca-k", type=_pca_k, default="auto", metavar="AUTO|int")
    p.add_argument("--hidden", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", required=True, help="output model JSON path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a trained model on a dataset's test split")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--report", required=True, help="output report JSON path")
    p.add_argument("--modality", choices=MODALITIES, default="fused")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def _warn_unpaired(data):
    for path in data.unpaired:
        print(f"warning: skipped unpaired file {path}", file=sys.stderr)


def _cmd_decompose(args) -> int:
    tree = decompose(load_image(args.input), WaveletKind(args.wavelet), args.levels)
    export_tree(tree, args.out)
    print(
        f"wrote {args.out}: wavelet {tree.wavelet.value}, {tree.levels} levels, "
        f"{tree.coefficient_count()} coefficients"
    )
    return 0


def _cmd_fuse(args) -> int:
    thermal = load_image(args.thermal)
    visual = load_image(args.visual)
    policy = FusionPolicy(FusionRule(args.approx_rule), FusionRule(args.detail_rule))
    fused = fuse_images(thermal, visual, WaveletKind(args.wavelet), args.levels, policy)
    save_image(fused, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_synth(args) -> int:
    out = generate_synthetic_dataset(
        args.classes, args.per_class, (args.rows, args.cols), args.seed, args.out
    )
    print(f"wrote {args.classes * args.per_class * 2} images under {out}")
    return 0


def _cmd_train(args) -> int:
    data = ingest_dataset(args.data, split=args.split, seed=args.seed)
    _warn_unpaired(data)
    cfg = PipelineConfig(
        wavelet=WaveletKind(args.wavelet),
        levels=args.levels,
        policy=FusionPolicy(FusionRule(args.approx_rule), FusionRule(args.detail_rule)),
        pca_k=args.pca_k,
        hidden=args.hidden,
        learning_rate=args.lr,
        momentum=args.momentum,
        epochs=args.epochs,
        seed=args.seed,
        split_fraction=args.split,
    )
    model = train_pipeline(data, cfg)
    save_model(model, args.model)
    n_train, n_test = data.counts()
    print(
        f"trained on {n_train} samples, {len(model.class_labels)} classes, "
        f"{model.eigenspace.k} components ({n_test} test samples held out)"
    )
    print(
        f"epoch error {model.mlp.final_error:.6g} after {model.mlp.epochs_run} epochs"
    )
    print(f"wrote {args.model}")
    return 0


def _cmd_evaluate(args) -> int:
    model = load_model(args.model)
    data = ingest_dataset(
        args.data, split=model.config.split_fraction, seed=model.config.seed
    )
    _warn_unpaired(data)
    report = evaluate(model, data, modality=args.modality)
    save_report(report, args.report)
    print(format_report(report))
    print(f"wrote {args.report}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
