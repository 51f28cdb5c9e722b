"""Command-line entry point: ``asvgd run | sweep | compare``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from asvgd.config import SCHEDULE_NAMES, load_config
from asvgd.errors import NumericalError, ValidationError
from asvgd.experiment import compare_schedules, run_experiment, run_sweep
from asvgd.presets import PRESETS

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

logger = logging.getLogger("asvgd")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="PATH", help="YAML or JSON config file (a run manifest also works)")
    src.add_argument("--preset", metavar="NAME", help=f"named preset: {', '.join(PRESETS)}")
    common.add_argument("--seed", type=int, metavar="N", help="master seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--overwrite", action="store_true", help="replace existing artifacts")
    common.add_argument("--steps", type=int, metavar="N", help="number of iterations T")
    common.add_argument("--particles", type=int, metavar="N", help="number of particles n")
    common.add_argument("--epsilon", type=float, metavar="X", help="step size")
    common.add_argument("--checkpoint-every", type=int, metavar="N", help="diagnostics cadence")
    common.add_argument("--schedule", choices=SCHEDULE_NAMES, help="annealing schedule family")
    common.add_argument("--schedule-p", type=float, metavar="X", help="schedule exponent p")
    common.add_argument("--cycles", type=int, metavar="C", help="number of cyclical cycles")
    common.add_argument("--backend", choices=("compiled", "python"), help="force a kernel backend")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parallel = argparse.ArgumentParser(add_help=False)
    parallel.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel worker processes")

    parser = argparse.ArgumentParser(prog="asvgd", description="Run SVGD and annealed SVGD experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one experiment")
    sub.add_parser("sweep", parents=[common, parallel], help="run every entry of a config's sweep list")
    cmp = sub.add_parser("compare", parents=[common, parallel], help="compare annealing schedules")
    cmp.add_argument("--schedules", metavar="LIST",
                     help="comma-separated families (default: the config's compare list)")
    return parser


def overrides_from(args) -> dict:
    out = {}
    for flag, key in (("seed", "seed"), ("steps", "steps"), ("particles", "particles"),
                      ("epsilon", "step_size"), ("checkpoint_every", "checkpoint_every")):
        value = getattr(args, flag)
        if value is not None:
            out[key] = value
    schedule = {}
    if args.schedule is not None:
        schedule["family"] = args.schedule
        # a family switch should not inherit the previous family's exponent
        schedule["p"] = None
    if args.schedule_p is not None:
        schedule["p"] = args.schedule_p
    if args.cycles is not None:
        schedule["cycles"] = args.cycles
    if schedule:
        out["schedule"] = schedule
    if args.out is not None:
        out["output"] = {"directory": args.out}
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config or args.preset, overrides_from(args))
        if args.command == "run":
            s = run_experiment(config, overwrite=args.overwrite, backend=args.backend)
            print(f"{config.name}: iter={s.iteration} modes_covered={s.modes_covered} "
                  f"mmd2={s.mmd2:.6g} -> {s.directory}")
        elif args.command == "sweep":
            if args.jobs < 1:
                raise ValidationError("--jobs must be at least 1")
            for label, s in run_sweep(config, overwrite=args.overwrite, jobs=args.jobs, backend=args.backend):
                print(f"{label}: modes_covered={s.modes_covered} mmd2={s.mmd2:.6g}")
        else:
            if args.jobs < 1:
                raise ValidationError("--jobs must be at least 1")
            schedules = args.schedules.split(",") if args.schedules else None
            for label, s in compare_schedules(config, overwrite=args.overwrite, jobs=args.jobs,
                                              backend=args.backend, schedules=schedules):
                print(f"{label}: modes_covered={s.modes_covered} mmd2={s.mmd2:.6g}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
