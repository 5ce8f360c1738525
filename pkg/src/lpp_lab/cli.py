"""Command-line entry point: ``lpp-lab <subcommand> [flags]``.

Exit codes: 0 success, 1 internal error, 2 configuration error,
3 a statistical gate failed or was inconclusive.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Dict, List, Optional

from . import analytics as an
from .errors import ConfigError, ParameterError
from .experiments import RUNNERS, load_config_file, resolve, run_experiment
from .experiments.config import parse_value
from .experiments.report import PASS

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_GATE = 0, 1, 2, 3

# flag -> help text; every flag takes a string parsed by the config layer
FLAGS = {
    "r": "bulk weight parameter in (0, 1)",
    "p": "boundary parameter in (r, 1) (rw: step parameter)",
    "q": "second parameter",
    "xi": "direction as a,b",
    "m": "grid width / first coordinate",
    "n": "grid height / second coordinate / walk horizon",
    "size": "comma list of sizes",
    "delta": "cone margin in (0, 1)",
    "alpha": "segment position in (0, 1)",
    "s": "comma list of scale values",
    "reps": "number of replicates",
    "seed": "master seed",
    "threads": "worker threads (results do not depend on it)",
    "out": "output file (default: standard output)",
    "format": "csv or json (default: from --out extension, else json; analytics prints key=value)",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpp-lab", description="Exactly solvable last-passage percolation experiments.")
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    sub.required = True
    for name in list(RUNNERS) + ["analytics"]:
        sp = sub.add_parser(name, help=f"run the {name} {'calculator' if name == 'analytics' else 'experiment'}")
        for flag, text in FLAGS.items():
            kw = {"choices": ["csv", "json"]} if flag == "format" else {}
            sp.add_argument(f"--{flag}", default=None, help=text, **kw)
        sp.add_argument("--config", default=None, help="flat key = value file; flags win on conflict")
    st = sub.add_parser("selftest", help="deterministic identity suite and closed-form anchors")
    st.add_argument("--seed", type=int, default=None, help="seed for the random instances")
    return parser


def _collect(args) -> Dict[str, object]:
    values: Dict[str, object] = {}
    if args.config:
        values.update(load_config_file(args.config))
    for flag in FLAGS:
        raw = getattr(args, flag)
        if raw is not None:
            values[flag] = parse_value(flag, raw)
    return values


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _format_for(fmt: Optional[str], out: Optional[str]) -> str:
    if fmt:
        return fmt
    if out and os.path.splitext(out)[1].lower() == ".csv":
        return "csv"
    return "json"


def _num(v: float) -> str:
    return repr(round(float(v), 12))


def _analytics(values: Dict[str, object]) -> int:
    cfg = resolve("analytics", values)
    r = cfg.r
    rows: List[tuple] = []
    if cfg.xi is not None:
        rows.append(("pbar", an.pbar(cfg.xi, r)))
    rows.append(("gamma", an.shape_gamma((cfg.m, cfg.n), r)))
    if cfg.p is not None:
        xb = an.xibar(cfg.p, r)
        rows += [("xibar1", xb[0]), ("xibar2", xb[1]), ("M", an.stationary_M(cfg.p, (cfg.m, cfg.n), r))]
    if cfg.format == "json":
        text = json.dumps({k: round(float(v), 12) for k, v in rows}, indent=2) + "\n"
    else:
        text = "".join(f"{k}={_num(v)}\n" for k, v in rows)
    _emit(text, cfg.out)
    return EXIT_OK


def _experiment(command: str, values: Dict[str, object]) -> int:
    cfg = resolve(command, values)
    t0 = time.perf_counter()
    rep = run_experiment(cfg)
    fmt = _format_for(cfg.format, cfg.out)
    _emit(rep.to_csv() if fmt == "csv" else rep.to_json(timing=False), cfg.out)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{command}: status={rep.status} wall_seconds={time.perf_counter() - t0:.3f}", file=sys.stderr)
    return EXIT_OK if rep.status == PASS else EXIT_GATE


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "selftest":
            from .selftest import DEFAULT_SEED, run_selftest
            ok, _, text = run_selftest(DEFAULT_SEED if args.seed is None else args.seed)
            sys.stdout.write(text)
            return EXIT_OK if ok else EXIT_INTERNAL
        values = _collect(args)
        if args.command == "analytics":
            return _analytics(values)
        return _experiment(args.command, values)
    except (ConfigError, ParameterError) as exc:
        sub = parser._subparsers._group_actions[0].choices.get(args.command)
        (sub or parser).print_usage(sys.stderr)
        print(f"lpp-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal-error code
        print(f"lpp-lab {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
