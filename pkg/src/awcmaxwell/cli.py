"""Command-line entry point.

Three subcommands share one configuration surface:

    awcmaxwell run      --config run.cfg --out results
    awcmaxwell compare  --config run.cfg --out results
    awcmaxwell report   --manifest results/manifest.csv

Every config-file key is also a flag (--jmax 7 overrides jmax from the
file); --out overrides out_dir and --snapshot-every the snapshot
cadence.  Exit codes: 0 success, 2 configuration error, 3 numerical
instability.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import SimulationConfig, parse_config
from .errors import ConfigError, InstabilityError
from .harness import (
    compare_adaptive_vs_oracle,
    proportionality_report,
    run_simulation,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="key = value configuration file")
    parser.add_argument("--out", metavar="DIR", dest="out_dir",
                        help="output directory (overrides out_dir)")
    parser.add_argument("--snapshot-every", type=int, metavar="K")
    parser.add_argument("--domain-length-um", type=float, metavar="L")
    parser.add_argument("--jmin", type=int)
    parser.add_argument("--jmax", type=int)
    parser.add_argument("--order", type=int)
    parser.add_argument("--zeta", type=float)
    parser.add_argument("--dt-factor", type=float)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--boundary", choices=["PEC", "PML", "pec", "pml"])
    parser.add_argument("--pml-width-frac", type=float)
    parser.add_argument("--sigma-um", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="awcmaxwell",
        description="2D adaptive wavelet-collocation Maxwell solver")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment, write snapshots")
    _add_config_flags(run)

    compare = sub.add_parser(
        "compare", help="adaptive vs full-grid error series")
    _add_config_flags(compare)

    report = sub.add_parser(
        "report", help="wall-time vs cardinality correlation")
    report.add_argument("--manifest", metavar="PATH",
                        help="manifest to analyse (default OUT/manifest.csv)")
    report.add_argument("--out", metavar="DIR", dest="out_dir",
                        help="where to write timing.csv")
    return parser


def _load_config(args) -> SimulationConfig:
    text = ""
    if args.config is not None:
        text = Path(args.config).read_text()
    config = parse_config(text)
    overrides = {}
    for key in ("domain_length_um", "jmin", "jmax", "order", "zeta",
                "dt_factor", "steps", "boundary", "pml_width_frac",
                "sigma_um", "snapshot_every", "out_dir"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if "boundary" in overrides:
        overrides["boundary"] = overrides["boundary"].upper()
    if overrides:
        config = replace(config, **overrides)
        config.validate()
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    result = run_simulation(config)
    if result.records:
        cps = [r.cp for r in result.records]
        print(f"completed {len(result.records)} steps, "
              f"cp in [{min(cps):.4f}, {max(cps):.4f}]")
    else:
        print("completed 0 steps (initial snapshot only)")
    print(f"manifest: {result.manifest_path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    config = _load_config(args)
    records = compare_adaptive_vs_oracle(config)
    if records:
        worst = max(r.rel_err for r in records)
        print(f"reported {len(records)} steps, max relative error "
              f"{worst:.3e}")
    else:
        print("reported 0 steps (reference field below floor)")
    print(f"error series: {Path(config.out_dir) / 'error_series.csv'}")
    return EXIT_OK


def _cmd_report(args) -> int:
    manifest = args.manifest
    if manifest is None:
        base = args.out_dir if args.out_dir is not None else "out"
        manifest = Path(base) / "manifest.csv"
    pearson = proportionality_report(manifest, out_dir=args.out_dir)
    if pearson is None:
        print("pearson: undefined (zero variance)")
    else:
        print(f"pearson: {pearson:.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "compare": _cmd_compare,
                "report": _cmd_report}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
