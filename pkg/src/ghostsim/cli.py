"""Command-line interface: simulation, reconstruction, merging, metrics.

Every subcommand is a thin wrapper over library calls; identical flags
and seed give bit-identical output files. Exit codes: 0 success,
1 data error (one-line diagnostic on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .container import (
    ContainerEntry,
    entry_from_gf,
    gf_from_entry,
    group_entries,
    read_container,
    write_container,
)
from .errors import BadCheckpoints, GhostsimError, IndexOutOfRange
from .fma import AngleGrid, estimate_alpha, fma_merge_across
from .forward import RotationTrajectory, make_gf, max_samples, simulate_rotation_bgfs
from .imagecore import rotate
from .metrics import psnr, report, ssim, to_scale255
from .pgm import read_pgm, write_pgm
from .reconstruct import gi_from_gf, gi_from_planes, gi_progressive
from .report import write_curve_report, write_metrics_report, write_progress_report
from .speckle import gen_speckle_set

__all__ = ["build_parser", "main"]


def _cmd_simulate(args) -> int:
    obj = read_pgm(args.object)
    speckles = gen_speckle_set(args.seed, args.samples, obj.height, obj.width,
                               args.dist)
    label = os.path.splitext(os.path.basename(args.object))[0]
    gf = make_gf(obj, speckles, object_id=label)
    write_container(args.out, [entry_from_gf(gf, obj)])
    print(f"wrote {args.out}: 1 entry, m={args.samples}, "
          f"{obj.width}x{obj.height}, dist={args.dist}")
    return 0


def _cmd_rotate_sim(args) -> int:
    obj = read_pgm(args.object)
    traj = RotationTrajectory(omega_deg_per_ms=args.omega_deg_per_ms,
                              frame_interval_ms=args.frame_interval_ms,
                              n_frames=args.frames, n_batches=args.batches)
    bgfs = simulate_rotation_bgfs(obj, traj, args.samples_per_frame, args.seed)
    entries = []
    k = 0
    for bgf in bgfs:
        for gf in bgf.frames:
            ang = traj.angle_deg(k)
            truth = rotate(obj, ang) if ang != 0.0 else obj
            entries.append(entry_from_gf(gf, truth))
            k += 1
    write_container(args.out, entries)
    print(f"wrote {args.out}: {len(entries)} frames in {args.batches} batches, "
          f"m={args.samples_per_frame}/frame, step={traj.step_deg:g} deg")
    return 0


def _entry_at(entries, idx: int) -> ContainerEntry:
    if not 0 <= idx < len(entries):
        raise IndexOutOfRange(f"entry {idx} outside container of {len(entries)}")
    return entries[idx]


def _cmd_reconstruct(args) -> int:
    container = read_container(args.in_)
    entry = _entry_at(container.entries, args.entry)
    if entry.planes is not None:
        g = gi_from_planes(entry.planes, entry.buckets)
    else:
        g = gi_from_gf(gf_from_entry(entry))
    write_pgm(args.out, g.image)
    print(f"wrote {args.out}: entry {args.entry} ({entry.object_id!r}), "
          f"m={g.m_used}")

    if args.checkpoints is not None:
        cps = args.checkpoints
        if entry.planes is not None:
            partials = [gi_from_planes(entry.planes[:c], entry.buckets[:c])
                        for c in _checked(cps, entry.m)]
        else:
            h, w = container.height, container.width
            speckles = gen_speckle_set(entry.speckle_seed, entry.m, h, w,
                                       entry.distribution)
            partials = gi_progressive(speckles, entry.buckets, cps)
        truth = to_scale255(entry.ground_truth)
        psnrs, ssims = [], []
        for part in partials:
            test = to_scale255(part.image)
            psnrs.append(psnr(truth, test))
            ssims.append(ssim(truth, test))
        write_progress_report(args.curve, cps, psnrs, ssims)
        print(f"wrote {args.curve} and figure")
    return 0


def _checked(cps, m: int):
    # mirrors gi_progressive's checkpoint validation for the planes path
    if not cps:
        raise BadCheckpoints("checkpoint list is empty")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise BadCheckpoints(f"checkpoints must be strictly ascending, got {cps}")
    if cps[0] < 2 or cps[-1] > m:
        raise BadCheckpoints(f"checkpoints must lie in [2, {m}], got {cps}")
    return cps


def _cmd_fma(args) -> int:
    container = read_container(args.in_)
    bgfs = group_entries(container.entries)
    grid = AngleGrid(args.grid_min, args.grid_max, args.grid_step)
    est = estimate_alpha(bgfs, grid)

    base = args.base
    merged = fma_merge_across(bgfs, est.angle_deg, base=base)
    base_entry = container.entries[sum(b.n_frames for b in bgfs[:base[0]]) + base[1]]
    out_entry = ContainerEntry(
        object_id=f"merged@{base[0]}:{base[1]}",
        speckle_seed=bgfs[base[0]].speckle_seed,
        distribution=base_entry.distribution,
        ground_truth=base_entry.ground_truth,
        buckets=merged.buckets,
        planes=merged.planes,
    )
    write_container(args.out, [out_entry])
    if args.curves:
        write_curve_report(args.curves, est.curve, best_deg=est.angle_deg,
                           title="per-frame angle search")
    print(f"alpha_deg={est.angle_deg:.12g}")
    print(f"wrote {args.out}: merged {merged.buckets.shape[0]} samples from "
          f"{len(bgfs)} batches, base {base[0]}:{base[1]}")
    return 0


def _cmd_metrics(args) -> int:
    ref = read_pgm(args.ref)
    test = read_pgm(args.test)
    pair_id = (f"{os.path.splitext(os.path.basename(args.ref))[0]}_vs_"
               f"{os.path.splitext(os.path.basename(args.test))[0]}")
    rep = report(ref, test, pair_id=pair_id)
    print(f"psnr_db={rep.psnr_db:.12g} ssim={rep.ssim:.12g}")
    if args.csv:
        write_metrics_report(args.csv, [rep], pairs=[(ref, test)])
    return 0


def _cmd_max_samples(args) -> int:
    print(max_samples(args.freq_hz, args.omega_deg_per_s, args.theta_r_deg))
    return 0


def _u64(text: str) -> int:
    value = int(text, 0)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return value


def _checkpoint_list(text: str):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad checkpoint list {text!r}") from exc


def _batch_frame(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected batch:frame, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected batch:frame, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostsim",
        description="Ghost-imaging simulation, rotation deblurring, metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="measure a static object")
    p.add_argument("--object", required=True, help="input PGM image")
    p.add_argument("--samples", required=True, type=int, help="pattern count m")
    p.add_argument("--seed", required=True, type=_u64)
    p.add_argument("--dist", required=True, choices=["uniform01", "binary"])
    p.add_argument("--out", required=True, help="output container")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("rotate-sim", help="measure a rotating object in batches")
    p.add_argument("--object", required=True, help="input PGM image")
    p.add_argument("--omega-deg-per-ms", required=True, type=float)
    p.add_argument("--frames", required=True, type=int)
    p.add_argument("--batches", required=True, type=int)
    p.add_argument("--frame-interval-ms", required=True, type=float)
    p.add_argument("--samples-per-frame", required=True, type=int)
    p.add_argument("--seed", required=True, type=_u64)
    p.add_argument("--out", required=True, help="output container")
    p.set_defaults(func=_cmd_rotate_sim)

    p = sub.add_parser("reconstruct", help="ghost image of one container entry")
    p.add_argument("--in", dest="in_", required=True, help="input container")
    p.add_argument("--entry", required=True, type=int)
    p.add_argument("--out", required=True, help="output PGM")
    p.add_argument("--checkpoints", type=_checkpoint_list,
                   help="comma-separated sample counts for a quality curve")
    p.add_argument("--curve", help="CSV path for the quality curve")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("fma", help="estimate per-frame angle and merge batches")
    p.add_argument("--in", dest="in_", required=True, help="input container")
    p.add_argument("--grid-min", required=True, type=float,
                   help="per-frame angle grid minimum (deg)")
    p.add_argument("--grid-max", required=True, type=float)
    p.add_argument("--grid-step", required=True, type=float)
    p.add_argument("--base", required=True, type=_batch_frame,
                   help="batch:frame whose orientation is the merge target")
    p.add_argument("--out", required=True, help="output container")
    p.add_argument("--curves", help="CSV path for the correlation curve")
    p.set_defaults(func=_cmd_fma)

    p = sub.add_parser("metrics", help="PSNR and SSIM between two PGM images")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--csv", help="CSV report path (figure written alongside)")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("max-samples",
                       help="patterns per frame the sampling budget allows")
    p.add_argument("--freq-hz", required=True, type=float)
    p.add_argument("--omega-deg-per-s", required=True, type=float)
    p.add_argument("--theta-r-deg", required=True, type=float)
    p.set_defaults(func=_cmd_max_samples)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "reconstruct" and (args.checkpoints is None) != (args.curve is None):
        parser.error("--checkpoints and --curve must be given together")
    try:
        return args.func(args)
    except GhostsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
