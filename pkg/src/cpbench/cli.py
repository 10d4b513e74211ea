"""Command-line front end.

Exit codes: 0 on success, 2 for input/format problems, 3 for bad
configuration (unknown flags, invalid parameter values).
"""

from __future__ import annotations

import argparse
import sys

from .errors import DatasetKindError, FormatError, SchemaError
from .harness import (
    DEFAULT_ALPHA,
    DEFAULT_CAL_FRACTION,
    RunConfig,
    cmd_compare,
    cmd_conformalize,
    cmd_shift_eval,
    cmd_sweep_temperature,
)
from .scores import DEFAULT_RAPS_KREG, DEFAULT_RAPS_LAMBDA, METHODS, ScoreSpec

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; bad flags are
    # configuration errors here, which carry status 3.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}")


def _parse_u_mode(text: str) -> tuple[str, float | None]:
    if text == "uniform":
        return "uniform", None
    if text.startswith("fixed:"):
        value = float(text.split(":", 1)[1])
        return "fixed", value
    raise ValueError(f"u-mode must be 'uniform' or 'fixed:<v>', got {text!r}")


def _parse_t_grid(text: str) -> tuple[float, ...]:
    try:
        start_s, stop_s, count_s = text.split(":")
        start, stop, count = float(start_s), float(stop_s), int(count_s)
    except ValueError as exc:
        raise ValueError(f"t-grid must look like a:b:count, got {text!r}") from exc
    if count < 1 or stop <= start:
        raise ValueError("t-grid needs count >= 1 and b > a")
    if count == 1:
        return (start,)
    step = (stop - start) / (count - 1)
    return tuple(start + i * step for i in range(count))


def _add_common(parser):
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    parser.add_argument("--method", choices=METHODS, default="lac")
    parser.add_argument("--lambda", dest="penalty", type=float,
                        default=DEFAULT_RAPS_LAMBDA)
    parser.add_argument("--kreg", type=int, default=DEFAULT_RAPS_KREG)
    parser.add_argument("--u-mode", default="uniform",
                        help="uniform or fixed:<v> with v in [0,1]")
    parser.add_argument("--cal-frac", type=float, default=DEFAULT_CAL_FRACTION)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--temperature", type=float, default=None)
    parser.add_argument("--t-grid", default=None, help="a:b:count")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--format", choices=("json", "csv", "both"),
                        default="json")


def _build_config(args) -> RunConfig:
    u_mode, u_value = _parse_u_mode(args.u_mode)
    spec = ScoreSpec(
        method=args.method,
        penalty=args.penalty,
        k_reg=args.kreg,
        u_mode=u_mode,
        u_value=u_value,
    )
    t_grid = _parse_t_grid(args.t_grid) if args.t_grid else None
    return RunConfig(
        alpha=args.alpha,
        score=spec,
        cal_fraction=args.cal_frac,
        seed=args.seed,
        temperature=args.temperature,
        t_grid=t_grid,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpbench",
                     description="Conformal prediction sets over stored logits")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("conformalize", help="split, calibrate, and evaluate")
    p.add_argument("input")
    _add_common(p)

    p = sub.add_parser("sweep-temperature",
                       help="conformal metrics across a temperature grid")
    p.add_argument("input")
    _add_common(p)

    p = sub.add_parser("shift-eval",
                       help="calibrate on one file, test on another")
    p.add_argument("cal_input")
    p.add_argument("test_input")
    _add_common(p)

    p = sub.add_parser("compare", help="model x method comparison table")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--methods", default="lac,aps,raps",
                   help="comma-separated subset of lac,aps,raps")
    p.add_argument("--analyze", nargs=2, metavar=("RUN_A", "RUN_B"),
                   default=None,
                   help="two run labels (<stem>/<method>) for the "
                        "worst-class and set-size-delta diagnostics")
    _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _build_config(args)
    except SystemExit as exc:
        if exc.code:
            print(exc.code, file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "conformalize":
            payload = cmd_conformalize(args.input, cfg, args.out, args.format)
        elif args.command == "sweep-temperature":
            payload = cmd_sweep_temperature(args.input, cfg, args.out, args.format)
        elif args.command == "shift-eval":
            payload = cmd_shift_eval(args.cal_input, args.test_input, cfg,
                                     args.out, args.format)
        else:
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            for m in methods:
                if m not in METHODS:
                    print(f"configuration error: unknown method {m!r}",
                          file=sys.stderr)
                    return EXIT_CONFIG
            analyze = tuple(args.analyze) if args.analyze else None
            payload = cmd_compare(args.inputs, methods, cfg, args.out,
                                  args.format, analyze)
    except (FormatError, SchemaError, DatasetKindError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.out is None:
        import json

        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
