"""Command line interface: ``manifest-ig {extract,analyze,compare}``.

Exit codes: 0 success (skipped samples included), 1 usage or configuration
error, 2 data error (pool too small, empty vocabulary, bad report), 3 I/O
failure. Tables and reports go to stdout or files; progress goes to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import EXIT_OK, EXIT_USAGE, IoFailure, ManifestIGError, UsageError
from .model import Category
from .pipeline import (
    AnalysisOptions,
    analyze_records,
    labeled_files,
    load_cached_records,
    run_extraction,
)
from .report import FORMATS, load_report, render_category_comparison, render_gnuplot, render_top_table, write_report

log = logging.getLogger("manifest_ig")

CACHE_ENV = "MANIFEST_IG_CACHE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _n_per_class(text: str) -> int | None:
    if text.lower() == "all":
        return None
    return _positive_int(text)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not -(1 << 63) <= value < (1 << 64):
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--malware-dir", type=Path, help="directory of malware samples (label comes from placement)")
    p.add_argument("--benign-dir", type=Path, help="directory of benign samples")
    p.add_argument(
        "--cache",
        type=Path,
        default=os.environ.get(CACHE_ENV) or None,
        help=f"feature cache file (JSON lines); default ${CACHE_ENV}",
    )
    p.add_argument("--jobs", type=_non_negative_int, default=1, help="extraction worker processes (0 = all CPUs)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="manifest-ig", description="Rank Android permission/intent features by information gain.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more progress output on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="extract manifest features into the cache")
    _add_corpus_args(p)

    p = sub.add_parser("analyze", help="rank features of a labeled corpus and write a report")
    _add_corpus_args(p)
    p.add_argument(
        "--features-from-cache-only",
        action="store_true",
        help="analyze every record in --cache; labels come from the records",
    )
    p.add_argument("--n-per-class", type=_n_per_class, default=None, metavar="N|all", help="samples per class (default all)")
    p.add_argument("--seed", type=_seed, default=0, help="sampling seed, 64-bit integer (default 0)")
    p.add_argument("--top", type=_positive_int, default=10, help="rows in the printed table (default 10)")
    p.add_argument("--format", choices=FORMATS, default="plain", help="table format")
    p.add_argument("--min-support", type=_non_negative_int, default=0, help="drop features seen in fewer than K apps")
    p.add_argument("--category", choices=("permissions", "intents"), help="rank only one feature category")
    p.add_argument(
        "--namespace-categories",
        action="store_true",
        help="prefix names with 'permission:'/'intent:' instead of failing on collisions",
    )
    p.add_argument(
        "--vocabulary-from",
        type=Path,
        action="append",
        default=[],
        metavar="REPORT",
        help="also score every feature listed in REPORT (aligns vocabularies across corpora)",
    )
    p.add_argument("--name", help="corpus name for the report (default: malware directory name)")
    p.add_argument("--date-range", default="", help="free-form sample date range recorded in the report")
    p.add_argument("--out", type=Path, default=Path("report.json"), help="report file (default report.json)")

    p = sub.add_parser("compare", help="per-category mean IG grid across reports")
    p.add_argument("reports", nargs="+", type=Path, help="report files written by analyze")
    p.add_argument("--format", choices=FORMATS, default="plain", help="grid format")
    p.add_argument("--gnuplot", type=Path, help="also write a gnuplot data file here")
    return parser


def cmd_extract(args) -> int:
    if args.cache is None:
        raise UsageError(f"extract needs --cache (or ${CACHE_ENV})")
    if args.malware_dir is None and args.benign_dir is None:
        raise UsageError("extract needs --malware-dir and/or --benign-dir")
    files = labeled_files(args.malware_dir, args.benign_dir)
    run = run_extraction(files, args.cache, _jobs(args.jobs))
    for w in run.warnings:
        log.warning(w)
    statuses = run.status_counts()
    print(f"files: {len(files)}")
    print(f"new extractions: {run.new_records}")
    print(f"cache hits: {run.cache_hits}")
    print(f"duplicates in run: {run.duplicates}")
    print(f"ok: {statuses.get('ok', 0)}")
    print(f"skipped: {sum(c for s, c in statuses.items() if s != 'ok') + run.unreadable}")
    kinds = {s: c for s, c in statuses.items() if s != "ok"}
    if run.unreadable:
        kinds["Unreadable"] = kinds.get("Unreadable", 0) + run.unreadable
    for kind in sorted(kinds):
        print(f"  {kind}: {kinds[kind]}")
    return EXIT_OK


def _jobs(n: int) -> int:
    return n if n > 0 else (os.cpu_count() or 1)


def cmd_analyze(args) -> int:
    warnings: list[str] = []
    unreadable = 0
    if args.features_from_cache_only:
        if args.cache is None:
            raise UsageError(f"--features-from-cache-only needs --cache (or ${CACHE_ENV})")
        records, warnings = load_cached_records(args.cache)
        default_name = args.cache.stem
    else:
        if args.malware_dir is None or args.benign_dir is None:
            raise UsageError("analyze needs --malware-dir and --benign-dir (or --features-from-cache-only)")
        run = run_extraction(labeled_files(args.malware_dir, args.benign_dir), args.cache, _jobs(args.jobs))
        records, warnings, unreadable = run.records, run.warnings, run.unreadable
        default_name = args.malware_dir.resolve().name

    extra = []
    for path in args.vocabulary_from:
        extra.extend((s.feature, s.category) for s in load_report(path).scores)

    opts = AnalysisOptions(
        corpus=args.name or default_name,
        n_per_class=args.n_per_class,
        seed=args.seed,
        top_n=args.top,
        min_support=args.min_support,
        category=Category.parse(args.category) if args.category else None,
        namespace_categories=args.namespace_categories,
        date_range=args.date_range,
        extra_vocabulary=extra,
    )
    report = analyze_records(records, opts, warnings, unreadable)
    write_report(report, args.out)
    log.info("report written to %s", args.out)
    sys.stdout.write(render_top_table(report, args.top, args.format))
    return EXIT_OK


def cmd_compare(args) -> int:
    reports = [load_report(p) for p in args.reports]
    if args.gnuplot is not None:
        try:
            args.gnuplot.write_text(render_gnuplot(reports), encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot write {args.gnuplot}: {exc}") from exc
    sys.stdout.write(render_category_comparison(reports, args.format))
    return EXIT_OK


COMMANDS = {"extract": cmd_extract, "analyze": cmd_analyze, "compare": cmd_compare}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except ManifestIGError as exc:
        print(f"manifest-ig: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
