"""Command line: ``opplab expand|sample|verify|law|report``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, EXIT_SCHEMA, load_config, resolve
from .errors import OpplabError
from .expansion import expand
from .experiment import run_experiment
from .report import ReportError, render_report

TASKS = ("expand", "sample", "verify", "law")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opplab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in TASKS:
        p = sub.add_parser(name, help=f"run a {name} task")
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        if name == "expand":
            p.add_argument("x", nargs="?", help='rational in (0, 1), e.g. "2/5"')
            p.add_argument("--scheme", choices=("luroth", "engel", "sylvester"), default="luroth")
            p.add_argument("--max-digits", type=int, default=64)
    rp = sub.add_parser("report", help="summarise an artifact directory")
    rp.add_argument("artifact_dir")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            sys.stdout.write(render_report(args.artifact_dir))
            return 0
        if args.command == "expand" and args.config is None:
            if args.x is None:
                raise ConfigError("expand needs a rational or --config", EXIT_SCHEMA)
            seq = expand(args.x, args.scheme, args.max_digits)
            sys.stdout.write("".join(f"{d}\n" for d in seq.digits))
            return 0
        if args.config is None:
            raise ConfigError(f"{args.command} needs --config", EXIT_SCHEMA)
        cfg = load_config(args.config)
        if cfg["task"]["kind"] != args.command:
            raise ConfigError(f"config task is {cfg['task']['kind']!r}, not {args.command!r}", EXIT_SCHEMA,
                              [("task/kind", "does not match the subcommand")])
        cfg = resolve(cfg, args.seed, args.out)
        out, code = run_experiment(cfg)
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        print(f"{args.command}: wrote {out} (verdict: {summary.get('verdict') or 'n/a'})")
        return code
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OpplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
