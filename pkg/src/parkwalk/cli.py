"""Command-line entry point: ``parkwalk <command> [options]``.

Exit status is 0 on success, 1 for invalid input or a missing file and 2
for any other pipeline failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import GRIDS, PipelineConfig, load_config
from .errors import ParkwalkError, ValidationError
from .ingest import write_inputs
from .pipeline import run_pipeline, run_stages, stage_summary, write_bundle
from .synth import MODES, SyntheticSpec, generate

log = logging.getLogger("parkwalk")

STAGE_OF = {"walkshed": "walkshed", "profile": "profile", "normalize": "normalize", "benchmark": "benchmark",
            "summarize": "profile", "report": "normalize"}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="pipeline config file (key = value lines)")
    p.add_argument("--seed", type=int, help="seed for fold assignment and forests")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="parkwalk", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic input set with a matching config")
    s.add_argument("--n", type=int, default=200, help="number of parks")
    s.add_argument("--mode", choices=MODES, default="null-world")
    s.add_argument("--missing-tract-rate", type=float, default=0.0)

    helps = {
        "walkshed": "build walksheds only",
        "profile": "walksheds, tract components, profiles and inclusion decisions",
        "normalize": "everything up to normalized visitation and correlations",
        "benchmark": "everything up to the regression benchmark",
        "summarize": "profiles plus the baseline summary",
        "report": "normalized data, summary and figures without the benchmark",
        "run": "all stages, summary and figures",
    }
    for name, text in helps.items():
        c = sub.add_parser(name, parents=[common], help=text)
        if name in ("benchmark", "run"):
            c.add_argument("--grid", choices=GRIDS)
        if name in ("normalize", "benchmark", "report", "run"):
            c.add_argument("--normalization", choices=("fixed", "refit"))
            c.add_argument("--target", choices=("visits", "constant"))
    return parser


def _config(args) -> PipelineConfig:
    if args.config is None:
        raise ValidationError(f"{args.command} needs --config")
    cfg = load_config(args.config)
    over = {k: getattr(args, k, None) for k in ("seed", "out", "grid", "normalization", "target")}
    return cfg.replace(**{k: v for k, v in over.items() if v is not None})


def cmd_synth(args) -> int:
    out = args.out or Path("synth")
    spec = SyntheticSpec(n=args.n, mode=args.mode, seed=args.seed or 0, missing_tract_rate=args.missing_tract_rate)
    city = generate(spec)
    baselines = {k: float(v.mean()) for k, v in city.cohort.shares.items()}
    path = write_inputs(out, city.parks, city.visits, city.tracts, city.graph, baselines)
    print(f"wrote {len(city.parks)} parks and {len(city.tracts)} tracts; config at {path}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    if args.command == "run":
        b = run_pipeline(cfg)
    else:
        b = run_stages(cfg, STAGE_OF[args.command])
        if args.command in ("summarize", "report"):
            stage_summary(b)
        out = write_bundle(b)
        if args.command == "report" and cfg.figures:
            from .figures import render_figures
            b.notices.extend(render_figures(b, out / "figures"))
            write_bundle(b)
    print(f"{args.command}: {len(b.inputs.parks)} parks, {len(b.profiles)} included; bundle in {cfg.out}")
    if b.report is not None:
        print(b.report.to_text(), end="")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return cmd_synth(args) if args.command == "synth" else cmd_pipeline(args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParkwalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
