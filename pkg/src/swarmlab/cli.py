"""Command line entry point: ``swarmlab run|preset|param-region``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from swarmlab.config import ConfigError, parse_config
from swarmlab.harness import emit, run_experiment, write_csv, write_manifest
from swarmlab.presets import PRESETS, SORTED, preset
from swarmlab.region import DomainError, trace_boundary
from swarmlab.rng import DEFAULT_SEED

log = logging.getLogger("swarmlab")


def _cmd_run(args) -> int:
    path = Path(args.config)
    config = parse_config(path.read_text(encoding="utf-8"))
    records = run_experiment(config, workers=args.workers)
    stem = Path(config.output)
    files = emit(config, records, stem, sort_dimensions=args.sort_dimensions)
    write_manifest([(config, files)], stem.with_name(stem.name + "_manifest.json"))
    for f in files:
        print(f)
    return 0


def _cmd_preset(args) -> int:
    configs = preset(args.name, scale=args.scale, seed=args.seed)
    out = Path(args.out)
    entries = []
    for config in configs:
        log.info("running %s: %d reps x %d iterations", config.name, config.repetitions, config.iterations)
        records = run_experiment(config, workers=args.workers)
        files = emit(config, records, out / config.name, sort_dimensions=args.name in SORTED)
        entries.append((config, files))
        for f in files:
            print(f)
    print(write_manifest(entries, out / f"{args.name}_manifest.json"))
    return 0


def _cmd_param_region(args) -> int:
    chis = np.linspace(args.chi_min, args.chi_max, args.chi_steps)
    grid = dict(v_points=args.v_points, r_points=args.r_points, domain=args.domain)
    points = trace_boundary(args.n, args.a, chis, (args.c2_min, args.c2_max), margin=args.margin, **grid)
    rows = [
        {
            "chi": p.chi,
            "c2_boundary": p.c2_boundary,
            "sup_I_at_boundary": p.sup_I_at_boundary,
            "bracketed": int(p.bracketed),
        }
        for p in points
    ]
    fields = ["chi", "c2_boundary", "sup_I_at_boundary", "bracketed"]
    if args.out:
        print(write_csv(rows, args.out, fields))
    else:
        print(",".join(fields))
        for row in rows:
            print(",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k]) for k in fields))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sort-dimensions", action="store_true",
                   help="aggregate potentials by rank instead of by axis")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("preset", help="run a named experiment preset")
    p.add_argument("--name", required=True, choices=sorted(PRESETS))
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default="out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_preset)

    p = sub.add_parser("param-region", help="trace the (chi, c2) validity boundary")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--chi-min", type=float, required=True)
    p.add_argument("--chi-max", type=float, required=True)
    p.add_argument("--chi-steps", type=int, required=True)
    p.add_argument("--c2-min", type=float, required=True)
    p.add_argument("--c2-max", type=float, required=True)
    p.add_argument("--margin", type=float, default=0.01)
    p.add_argument("--v-points", type=int, default=501)
    p.add_argument("--r-points", type=int, default=2001)
    p.add_argument("--domain", choices=("leading", "all"), default="leading")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_param_region)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError, ValueError, OSError) as exc:
        print(f"swarmlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
