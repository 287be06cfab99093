"""Command-line entry point.

Exit codes: 0 success, 1 gate failure (``gates`` only), 2 usage error,
3 data or validation error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Iterator, TextIO

from metametrics.errors import DataError, MetaMetricsError, UsageError, ValidationErrors
from metametrics.history import SLOC_NORMALIZED, HistorySet
from metametrics.ingest import load_history_file, write_history_set
from metametrics.metrics import compute_report
from metametrics.reporting import (
    GatePolicy,
    build_heatmap,
    evaluate_gates,
    is_pair_selector,
    parse_selector,
    render_heatmap_csv,
    render_report,
    reports_for_policy,
)
from metametrics.synth import GeneratorConfig, generate, paper_fixture

log = logging.getLogger("metametrics")

EXIT_OK = 0
EXIT_GATE_FAILED = 1
EXIT_USAGE = 2
EXIT_DATA = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _threads() -> int:
    raw = os.environ.get("METAMETRICS_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring non-integer METAMETRICS_THREADS=%r", raw)
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


@contextmanager
def _mapper() -> Iterator[Callable]:
    """Order-preserving map, parallel when more than one thread is allowed."""
    n = _threads()
    if n == 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=n) as pool:
        yield pool.map


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yield fh


def _stamp(args: argparse.Namespace) -> str | None:
    if getattr(args, "stamp", False):
        return datetime.now(timezone.utc).replace(microsecond=0).isoformat()
    return None


def _load(args: argparse.Namespace, **extra: bool) -> HistorySet:
    try:
        return load_history_file(args.input, lenient=args.lenient, renumber=args.renumber, **extra)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc.strerror or exc}") from None


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise DataError(f"cannot read {path}: invalid UTF-8") from None


# -- subcommands --------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    hs = _load(args, collect_errors=args.collect_errors)
    records = sum(h.n for h in hs.values())
    sys.stderr.write(f"ok: {len(hs)} artifact(s), {records} revision record(s)\n")
    return EXIT_OK


def cmd_compute(args: argparse.Namespace) -> int:
    hs = _load(args)
    gates = args.gate
    for a, b in zip(gates, gates[1:]):
        if a >= b:
            raise UsageError(f"--gate values must be strictly increasing, got {a} then {b}")
    with _mapper() as pmap:
        reports = list(pmap(
            lambda h: compute_report(h, gates, args.indicator, args.situation, strict_eq7=args.strict_eq7),
            hs.values(),
        ))
    sys.stdout.write(render_report({r.artifact: r for r in reports}, (), args.format, stamp=_stamp(args)))
    return EXIT_OK


def cmd_gates(args: argparse.Namespace) -> int:
    policy = GatePolicy.from_json(_read_text(args.policy))
    hs = _load(args)
    with _mapper() as pmap:
        reports = reports_for_policy(hs, policy, strict_eq7=args.strict_eq7, map_fn=pmap)
    verdicts = evaluate_gates(reports, policy)
    sys.stdout.write(render_report(reports, verdicts, args.format, stamp=_stamp(args)))
    failed = [v for v in verdicts if v.overall == "fail"]
    for v in failed:
        sys.stderr.write(f"gate failed: {v.artifact} {v.gate_from.name} -> {v.gate_to.name}\n")
    return EXIT_GATE_FAILED if failed else EXIT_OK


def cmd_heatmap(args: argparse.Namespace) -> int:
    gates = args.gate
    for a, b in zip(gates, gates[1:]):
        if a >= b:
            raise UsageError(f"--gate values must be strictly increasing, got {a} then {b}")
    for sel in args.metric:
        parse_selector(sel)
    gate = gates[-1]
    baseline = gates[-2] if len(gates) > 1 else gate
    indicators = sorted({parse_selector(s)[1] for s in args.metric if s.startswith("q4:")})
    situations = sorted({parse_selector(s)[1] for s in args.metric if s.startswith("q6:")})
    pairs = [(baseline, gate)] if any(is_pair_selector(s) for s in args.metric) else []

    hs = _load(args)
    with _mapper() as pmap:
        reports = list(pmap(
            lambda h: compute_report(
                h, sorted({baseline, gate}), indicators, situations, pairs=pairs, strict_eq7=args.strict_eq7
            ),
            hs.values(),
        ))
    matrix = build_heatmap({r.artifact: r for r in reports}, args.metric, gate, baseline)
    with _output(args.out) as out:
        out.write(render_heatmap_csv(matrix))
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    config = GeneratorConfig.from_json(_read_text(args.config))
    hs = generate(config)
    with _output(args.out) as out:
        write_history_set(hs, out)
    return EXIT_OK


def cmd_fixture(args: argparse.Namespace) -> int:
    with _output(args.out) as out:
        write_history_set([paper_fixture()], out)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, metavar="FILE", help="JSON Lines history file")
    p.add_argument("--lenient", action="store_true", help="ignore unknown keys instead of rejecting them")
    p.add_argument("--renumber", action="store_true", help="remap each artifact's revision ids onto 1..N")


def _add_render(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--strict-eq7", action="store_true",
                   help="include failing revisions (acting time 0) in the Q6 deviation sum")
    p.add_argument("--stamp", action="store_true", help="add a generation timestamp to the report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metametrics", description="Meta-metrics over per-revision test results.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a history file")
    _add_input(p)
    p.add_argument("--collect-errors", action="store_true", help="report every error instead of the first")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compute", help="compute metrics at the given gates")
    _add_input(p)
    p.add_argument("--gate", type=_positive_int, action="append", required=True, metavar="N")
    p.add_argument("--indicator", action="append", default=[], choices=SLOC_NORMALIZED)
    p.add_argument("--situation", action="append", default=[], metavar="ID")
    _add_render(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("gates", help="evaluate a gate policy; exit 1 if any gate fails")
    _add_input(p)
    p.add_argument("--policy", required=True, metavar="FILE")
    _add_render(p)
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("heatmap", help="cross-artifact heatmap CSV at a gate")
    _add_input(p)
    p.add_argument("--gate", type=_positive_int, action="append", required=True, metavar="N",
                   help="column gate; when given twice, the first is the baseline for pair metrics")
    p.add_argument("--metric", action="append", required=True, metavar="SEL")
    p.add_argument("--out", metavar="FILE", help="output path (default: stdout)")
    p.add_argument("--strict-eq7", action="store_true")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("generate", help="write a synthetic history corpus")
    p.add_argument("--config", required=True, metavar="FILE")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fixture", help="write the 892-revision CCS reference history")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ValidationErrors as exc:
        for err in exc.errors:
            sys.stderr.write(f"error: {err}\n")
        sys.stderr.write(f"{len(exc.errors)} error(s)\n")
        return EXIT_DATA
    except DataError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except MetaMetricsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
