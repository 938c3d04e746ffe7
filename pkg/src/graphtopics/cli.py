"""Command line front end for the pipeline.

One verb per stage plus `run` for the whole pipeline and `compare` for
scoring partition files against each other. Configuration comes from a JSON
file; --seed/--out/--jobs override the corresponding config keys.

Exit codes: 0 success, 2 configuration error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import sys

from .pipeline import (
    STAGES,
    ConfigError,
    PipelineConfig,
    compare_partitions,
    run_pipeline,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphtopics",
        description="Multiscale topic extraction over document similarity graphs.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p):
        p.add_argument("--config", help="path to a JSON config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--jobs", type=int, help="override worker count")
        p.add_argument(
            "--force",
            action="store_true",
            help="re-run stages even when cached artifacts are up to date",
        )

    for stage in STAGES:
        add_common(sub.add_parser(stage, help=f"run only the {stage} stage"))
    add_common(sub.add_parser("run", help="run every stage in order"))

    cmp_parser = sub.add_parser(
        "compare", help="pairwise NMI/ARI/VI between partition CSV files"
    )
    cmp_parser.add_argument("partitions", nargs="+", help="partition CSV paths")
    cmp_parser.add_argument("--out", help="directory for the score tables")
    return parser


def _load_config(args) -> PipelineConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    config = PipelineConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    if args.jobs is not None:
        config.n_jobs = args.jobs
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.verb == "compare":
        try:
            result = compare_partitions(args.partitions, out_dir=args.out)
        except (OSError, ValueError) as exc:
            print(f"compare failed: {exc}", file=sys.stderr)
            return 3
        names = result["names"]
        print("pair\tnmi\tari\tvi")
        for a in range(len(names)):
            for b in range(a + 1, len(names)):
                print(
                    f"{names[a]} vs {names[b]}\t{result['nmi'][a][b]:.6f}\t"
                    f"{result['ari'][a][b]:.6f}\t{result['vi'][a][b]:.6f}"
                )
        return 0

    try:
        config = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    stages = None if args.verb == "run" else (args.verb,)
    return run_pipeline(config, stages=stages, force=args.force)


if __name__ == "__main__":
    sys.exit(main())
