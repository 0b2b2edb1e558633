"""``rangekit`` command line.

Exit codes: 0 success, 1 configuration error, 2 numerical-certificate failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import (
    build_config,
    load_config_file,
    parse_float_list,
    parse_int_list,
    parse_phase_mode,
    parse_targets,
)
from .errors import DomainError, NumericalError
from .output import check_csv, table_svg, table_to_csv, table_to_json
from .sweeps import COMMANDS

log = logging.getLogger("rangekit")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ConfigError(message)


def _add_scenario_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--nbar", type=float, help="mean thermal background photon number")
    p.add_argument("--ns-grid", dest="ns_grid", help="signal intensities: a,b,c or log:lo:hi:count")
    p.add_argument("--phase-mode", dest="phase_mode", help="fixed:<phi> or dephased")
    p.add_argument("--cutoff", type=int, help="largest photon number kept (default 30)")
    p.add_argument("--epsilon", type=float, help="false-alarm budget (default 0.01)")
    p.add_argument("--rule-reference-ns", dest="rule_reference_ns", type=float,
                   help="intensity the fixed receiver and rule are built for (default 1)")
    p.add_argument("--seed", type=int, help="PRNG seed, 0 <= seed < 2**64")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p.add_argument("--cutoffs", help="comma-separated ascending cutoffs (cutoff-study)")
    p.add_argument("--study-ns", dest="study_ns", type=float, help="signal intensity for cutoff-study")
    p.add_argument("--k-phases", dest="k_phases", type=int, help="phase samples for phase-study")
    p.add_argument("--slots", type=int, help="number of range slots (ranging-demo)")
    p.add_argument("--targets", help="slot:mean list, e.g. 5:3,15:1 (ranging-demo)")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--svg", metavar="PATH", help="also write a line plot")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rangekit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rangekit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "sweep-symmetric": "equal-prior error versus signal intensity",
        "sweep-asymmetric": "missed-detection probability at a false-alarm budget",
        "cutoff-study": "Kennedy limit and displacement versus photon-number cutoff",
        "phase-study": "phase-sensitive receiver averaged over an unknown phase",
        "acceptance-profile": "Omega(n) of the randomized asymmetric test",
        "ranging-demo": "time-of-flight ranging simulation",
    }
    for name, text in helps.items():
        _add_scenario_flags(sub.add_parser(name, help=text, description=text))
    check = sub.add_parser("schema-check", help="validate emitted CSV files")
    check.add_argument("files", nargs="+")
    return parser


_LIST_FLAGS = {
    "ns_grid": parse_float_list,
    "phase_mode": parse_phase_mode,
    "cutoffs": parse_int_list,
    "targets": parse_targets,
}
_SCALAR_FLAGS = ("nbar", "cutoff", "epsilon", "rule_reference_ns", "seed", "trials", "study_ns", "k_phases", "slots")


def _scenario(args):
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in _SCALAR_FLAGS}
    for key, conv in _LIST_FLAGS.items():
        raw = getattr(args, key)
        if raw is not None:
            overrides[key] = conv(raw)
    return build_config(file_values, overrides)


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _schema_check(files) -> int:
    status = EXIT_OK
    for path in files:
        try:
            with open(path, encoding="utf-8", newline="") as fh:
                problems = check_csv(fh.read())
        except OSError as exc:
            problems = [str(exc)]
        if problems:
            status = EXIT_CONFIG
            for p in problems:
                print(f"{path}: {p}", file=sys.stderr)
        else:
            print(f"{path}: ok")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ConfigError as exc:
        print(f"rangekit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    if args.command == "schema-check":
        return _schema_check(args.files)
    try:
        cfg = _scenario(args)
        fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
        table = COMMANDS[args.command](cfg)
        _write(args.out, table_to_csv(table) if fmt == "csv" else table_to_json(table))
        if args.svg:
            _write(args.svg, table_svg(table))
    except NumericalError as exc:
        print(f"rangekit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, _ConfigError, OSError) as exc:
        print(f"rangekit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "ranging-demo":
        result = table.extra["result"]
        log.info("pooled empty-slot rate %.4f +- %.4f", result["pooled_empty_rate"], result["pooled_empty_stderr"])
        for slot, c in result["contrasts"].items():
            print(
                f"slot {slot}: detection contrast {c['detection_contrast']:.2f}, "
                f"intensity contrast {c['intensity_contrast']:.2f}",
                file=sys.stderr,
            )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
