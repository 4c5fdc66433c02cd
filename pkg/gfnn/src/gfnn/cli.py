"""Command-line entry points: gfnn-datagen, gfnn-train, gfnn-eval.

Exit codes: 0 success, 1 data error (one-line diagnostic on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .data import check_compatible, load_training_data
from .datagen import write_dataset
from .errors import GfnnError
from .evaluate import evaluate, write_report
from .model import load_model
from .train import TrainConfig, train

__all__ = ["main_datagen", "main_train", "main_eval"]

_DIST_CODE = {"uniform01": 0, "binary": 1}


def _u64(text: str) -> int:
    value = int(text, 0)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return value


def _run(parser: argparse.ArgumentParser, handler, argv) -> int:
    args = parser.parse_args(argv)
    try:
        return handler(args)
    except (GfnnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_datagen(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gfnn-datagen",
        description="Synthesize a digit dataset as a GFB1 file.")
    parser.add_argument("--digits", required=True, type=int,
                        help="total rendered digits")
    parser.add_argument("--size", type=int, default=64, help="canvas size")
    parser.add_argument("--samples", type=int, default=128,
                        help="patterns per entry (m)")
    parser.add_argument("--seed", required=True, type=_u64)
    parser.add_argument("--dist", choices=sorted(_DIST_CODE), default="uniform01")
    parser.add_argument("--out", required=True, help="training GFB1 path")
    parser.add_argument("--heldout", type=int, default=0,
                        help="digits split off into a second file")
    parser.add_argument("--heldout-out", help="held-out GFB1 path")

    def handler(args):
        if (args.heldout > 0) != (args.heldout_out is not None):
            parser.error("--heldout and --heldout-out must be given together")
        summary = write_dataset(args.out, args.digits, args.size, args.samples,
                                args.seed, _DIST_CODE[args.dist],
                                heldout=args.heldout,
                                heldout_out=args.heldout_out)
        print(f"wrote {args.out}: {summary['train']} entries, "
              f"m={summary['m']}, {summary['size']}x{summary['size']} "
              f"(sampling ratio {summary['sampling_ratio']:.6g})")
        if args.heldout:
            print(f"wrote {args.heldout_out}: {summary['heldout']} held-out entries")
        return 0

    return _run(parser, handler, argv)


def main_train(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gfnn-train",
        description="Train the plane-stack-to-image network on a GFB1 file.")
    parser.add_argument("--data", required=True, help="training GFB1 file")
    parser.add_argument("--epochs", required=True, type=int)
    parser.add_argument("--batch", required=True, type=int)
    parser.add_argument("--lr", required=True, type=float)
    parser.add_argument("--wd", required=True, type=float)
    parser.add_argument("--seed", required=True, type=_u64)
    parser.add_argument("--out", required=True, help="model output directory")
    parser.add_argument("--width-base", type=int, default=32,
                        help="channel width of the first stage")
    parser.add_argument("--val-fraction", type=float, default=0.1)

    def handler(args):
        try:
            cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch,
                              learning_rate=args.lr, weight_decay=args.wd,
                              seed=args.seed, width_base=args.width_base,
                              val_fraction=args.val_fraction)
        except ValueError as exc:
            parser.error(str(exc))
        _, log = train(args.data, cfg, out_dir=args.out, verbose=True)
        print(f"wrote {args.out}: final val loss {log['val_loss'][-1]:.6g} "
              f"(initial {log['val_loss_initial']:.6g})")
        return 0

    return _run(parser, handler, argv)


def main_eval(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gfnn-eval",
        description="Score a trained model on every entry of a GFB1 file.")
    parser.add_argument("--model", required=True, help="model directory")
    parser.add_argument("--data", required=True, help="GFB1 file to score")
    parser.add_argument("--report", required=True, help="JSON report path")
    parser.add_argument("--batch", type=int, default=16)

    def handler(args):
        model = load_model(args.model)
        data = load_training_data(args.data)
        check_compatible(data, model.h, model.w, model.m)
        results = evaluate(model, data, batch_size=args.batch)
        write_report(args.report, results)
        mean_psnr = float(np.mean([r["psnr_db"] for r in results]))
        mean_ssim = float(np.mean([r["ssim"] for r in results]))
        print(f"wrote {args.report}: {len(results)} entries, "
              f"mean_psnr_db={mean_psnr:.12g} mean_ssim={mean_ssim:.12g}")
        return 0

    return _run(parser, handler, argv)
