"""``houghface`` command line.

Exit codes: 0 success, 1 usage/validation/parse error, 2 I/O error.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, plotting
from .descriptor import PipelineConfig, extract_descriptor, extract_stages, load_config, write_descriptor
from .errors import HoughFaceError, IngestionError
from .hough import hough_transform, top_peaks
from .imageops import GRADIENT_MAX, write_pgm
from .matcher import classify

log = logging.getLogger("houghface")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
STAGES = ("gradient", "binary", "dilated", "blocks", "hough")


class UsageError(HoughFaceError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="flat 'key = value' pipeline config file")
    p.add_argument("--seed", type=int, help="block sampling seed (overrides config)")
    p.add_argument("--agg", choices=("min", "max"), help="per-block aggregation over gated blocks")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for extraction")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="houghface",
                     description="Face identification from Hough peaks of significant gradient blocks.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("extract", parents=[common], help="write the descriptor of one image")
    p.add_argument("image", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("enroll", parents=[common], help="build a gallery from train records")
    p.add_argument("manifest", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="gallery directory")

    p = sub.add_parser("identify", parents=[common], help="classify one image against a gallery")
    p.add_argument("image", type=Path)
    p.add_argument("--gallery", type=Path, required=True)
    p.add_argument("--allow-mismatch", action="store_true",
                   help="match even if config fingerprints differ")
    p.add_argument("--all", action="store_true", help="list every gallery distance")

    p = sub.add_parser("evaluate", parents=[common], help="run the genuine/impostor protocol")
    p.add_argument("manifest", type=Path)
    p.add_argument("--report", type=Path, help="write 'key: value' metrics here (+ PNG figures)")
    p.add_argument("--counts", action="store_true",
                   help="treat MANIFEST as a precomputed 'key: value' confusion fixture")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures next to --report")

    p = sub.add_parser("inspect", parents=[common], help="dump an intermediate stage")
    p.add_argument("image", type=Path)
    p.add_argument("--stage", choices=STAGES, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--block", type=int, default=0, help="block index for --stage hough")
    p.add_argument("--figure", type=Path, help="also render a PNG overview of all stages")
    return parser


def config_from_args(args):
    cfg = load_config(args.config) if args.config else PipelineConfig()
    changes = {}
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    if args.agg is not None:
        changes["aggregation"] = args.agg
    return cfg.replace(**changes) if changes else cfg


def cmd_extract(args, cfg):
    d = extract_descriptor(args.image, cfg, identifier=str(args.image))
    write_descriptor(d, args.output)
    print(f"{args.output}: {len(d.entries)} blocks")


def cmd_enroll(args, cfg):
    manifest = harness.load_manifest(args.manifest)
    gallery = harness.build_gallery(manifest, cfg, args.jobs)
    harness.save_gallery(gallery, args.output)
    print(f"{args.output}: {len(gallery)} descriptors, "
          f"{len({c for _, c in gallery.entries})} classes")


def cmd_identify(args, cfg):
    gallery = harness.load_gallery(args.gallery)
    probe = extract_descriptor(args.image, cfg, identifier=str(args.image))
    result = classify(probe, gallery, cfg, allow_mismatch=args.allow_mismatch)
    print(f"{result.class_id}\t{result.distance!r}")
    if args.all:
        for idx, dist in result.per_gallery_distances:
            desc, class_id = gallery.entries[idx]
            print(f"  {idx}\t{class_id}\t{dist!r}\t{desc.identifier}")


def cmd_evaluate(args, cfg):
    trials = None
    if args.counts:
        counts = harness.parse_counts(args.manifest.read_text(), str(args.manifest))
    else:
        manifest = harness.load_manifest(args.manifest)
        trials = harness.evaluate_trials(manifest, cfg, args.jobs)
        counts = harness.tally(trials)
    report = harness.metrics(counts)
    sys.stdout.write(harness.format_table(counts, report))
    if args.report:
        args.report.write_text(harness.format_report(counts, report))
        if not args.no_figures:
            paths = plotting.figure_paths(args.report)
            plotting.plot_metrics(counts, report, paths["metrics"])
            if trials is not None:
                plotting.plot_distance_histogram(trials, paths["distances"])


def _block_overlay(stages, size):
    canvas = (stages.gray // 2).astype(np.uint8)
    for b in stages.blocks:
        canvas[b.y, b.x:b.x + size] = 255
        canvas[b.y + size - 1, b.x:b.x + size] = 255
        canvas[b.y:b.y + size, b.x] = 255
        canvas[b.y:b.y + size, b.x + size - 1] = 255
    return canvas


def cmd_inspect(args, cfg):
    stages = extract_stages(args.image, cfg)
    s = cfg.block_size
    if args.stage == "gradient":
        write_pgm(args.out, stages.gradient, maxval=GRADIENT_MAX)
    elif args.stage == "binary":
        write_pgm(args.out, stages.binary * 255, maxval=255)
    elif args.stage == "dilated":
        write_pgm(args.out, stages.dilated * 255, maxval=255)
    elif args.stage == "blocks":
        write_pgm(args.out, _block_overlay(stages, s), maxval=255)
        print(f"blocks: {len(stages.blocks)}")
    else:
        blocks = stages.blocks.blocks
        if not 0 <= args.block < len(blocks):
            raise HoughFaceError(f"block index {args.block} out of range "
                                 f"(image has {len(blocks)} blocks)")
        b = blocks[args.block]
        acc = hough_transform(stages.dilated[b.y:b.y + s, b.x:b.x + s], cfg.hough)
        top = max(1, int(acc.votes.max()))
        scaled = (acc.votes * 255 + top // 2) // top
        write_pgm(args.out, scaled, maxval=255, plain=True)
        sidecar = Path(f"{args.out}.txt")
        with open(sidecar, "w") as fh:
            fh.write(f"# block x={b.x} y={b.y} size={s} rho_offset={acc.rho_offset} "
                     f"theta_min={cfg.hough.theta_min} theta_step={cfg.hough.theta_step} "
                     f"rho_step={cfg.hough.rho_step}\n")
            np.savetxt(fh, acc.votes, fmt="%d")
        for p in top_peaks(acc, 2):
            print(f"peak rho={p.rho!r} theta={p.theta!r} votes={p.votes}")
    if args.figure:
        plotting.plot_stages(stages, args.figure, s)


COMMANDS = {
    "extract": cmd_extract,
    "enroll": cmd_enroll,
    "identify": cmd_identify,
    "evaluate": cmd_evaluate,
    "inspect": cmd_inspect,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        cfg = config_from_args(args)
        COMMANDS[args.command](args, cfg)
    except IngestionError as exc:
        print(f"houghface: {exc}", file=sys.stderr)
        return EXIT_IO
    except HoughFaceError as exc:
        print(f"houghface: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"houghface: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
