"""Analysis reports: top-N tables, category comparison grids, JSON documents."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import InvalidReport, IoFailure, SchemaVersionError
from .ig import FeatureScore
from .model import Category, ClassLabel

SCHEMA_VERSION = 1
FORMATS = ("plain", "markdown", "csv")


@dataclass
class Diagnostics:
    skipped_files: int = 0
    oov_count: int = 0
    warnings: list[str] = field(default_factory=list)
    skipped_by_kind: dict[str, int] = field(default_factory=dict)


@dataclass
class AnalysisReport:
    corpus: str
    class_counts: dict[ClassLabel, int]
    scores: list[FeatureScore]
    category_means: dict[Category, float]
    seed: int | None = None
    date_range: str = ""
    top_n: int = 10
    vocabulary_size: int = 0
    generated_at: str | None = None
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def __post_init__(self):
        self.class_counts = {label: int(self.class_counts.get(label, 0)) for label in ClassLabel}

    def top(self, n: int | None = None) -> list[FeatureScore]:
        return self.scores[: self.top_n if n is None else n]


# -- text rendering -----------------------------------------------------------


def _fmt(x: float | None) -> str:
    return "n/a" if x is None else f"{x:.4f}"


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _plain_text(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _markdown_text(rows: Sequence[Sequence[str]], align: Sequence[str]) -> str:
    def esc(cell: str) -> str:
        return cell.replace("|", "\\|")

    out = ["| " + " | ".join(esc(c) for c in rows[0]) + " |", "|" + "|".join(align) + "|"]
    out += ["| " + " | ".join(esc(c) for c in row) + " |" for row in rows[1:]]
    return "\n".join(out) + "\n"


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


def render_top_table(report: AnalysisReport, n: int | None = None, fmt: str = "plain") -> str:
    """The ``n`` best features as an (IG Score, Feature, Category) table.

    Human formats round scores to 4 decimals; CSV keeps full precision.
    """
    _check_format(fmt)
    n = report.top_n if n is None else n
    if n < 1:
        raise ValueError("n must be >= 1")
    top = report.top(n)
    if fmt == "csv":
        return _csv_text([("ig", "feature", "category")] + [(repr(s.ig), s.feature, s.category.display) for s in top])
    rows = [("IG Score", "Feature", "Category")] + [(_fmt(s.ig), s.feature, s.category.display) for s in top]
    if fmt == "markdown":
        return _markdown_text(rows, ["---:", "---", "---"])
    return _plain_text(rows)


def comparison_rows(reports: Sequence[AnalysisReport]) -> list[tuple[str, float | None, float | None, float | None]]:
    """``(corpus, Permissions mean, Intents mean, Permissions - Intents)`` per report."""
    rows = []
    for r in reports:
        p = r.category_means.get(Category.PERMISSION)
        i = r.category_means.get(Category.INTENT)
        rows.append((r.corpus, p, i, None if p is None or i is None else p - i))
    return rows


def render_category_comparison(reports: Sequence[AnalysisReport], fmt: str = "plain") -> str:
    _check_format(fmt)
    if not reports:
        raise ValueError("need at least one report")
    data = comparison_rows(reports)
    if fmt == "csv":
        full = lambda x: "n/a" if x is None else repr(x)  # noqa: E731
        return _csv_text([("corpus", "permissions", "intents", "delta")] + [(c, full(p), full(i), full(d)) for c, p, i, d in data])
    rows = [("Corpus", "Permissions", "Intents", "Delta (P - I)")] + [(c, _fmt(p), _fmt(i), _fmt(d)) for c, p, i, d in data]
    if fmt == "markdown":
        return _markdown_text(rows, ["---", "---:", "---:", "---:"])
    return _plain_text(rows)


def render_gnuplot(reports: Sequence[AnalysisReport]) -> str:
    """Whitespace-separated data block for gnuplot's histogram style; NaN marks gaps."""
    lines = ["# corpus permissions intents delta"]
    for c, p, i, d in comparison_rows(reports):
        cells = ["NaN" if x is None else repr(x) for x in (p, i, d)]
        lines.append(json.dumps(c) + " " + " ".join(cells))
    return "\n".join(lines) + "\n"


# -- JSON document ------------------------------------------------------------


def report_to_dict(report: AnalysisReport) -> dict:
    d = report.diagnostics
    return {
        "schema_version": SCHEMA_VERSION,
        "corpus": {"name": report.corpus, "date_range": report.date_range},
        "generated_at": report.generated_at,
        "seed": report.seed,
        "class_counts": {label.value: report.class_counts.get(label, 0) for label in ClassLabel},
        "vocabulary_size": report.vocabulary_size,
        "top_n": report.top_n,
        "scores": [
            {
                "feature": s.feature,
                "category": s.category.value,
                "ig": s.ig,
                "h_dataset": s.h_dataset,
                "h_conditional": s.h_conditional,
            }
            for s in report.scores
        ],
        "category_means": {cat.value: report.category_means[cat] for cat in Category if cat in report.category_means},
        "diagnostics": {
            "skipped_files": d.skipped_files,
            "skipped_by_kind": dict(sorted(d.skipped_by_kind.items())),
            "oov_count": d.oov_count,
            "warnings": list(d.warnings),
        },
    }


def report_from_dict(doc: dict, source: str = "<report>") -> AnalysisReport:
    if not isinstance(doc, dict):
        raise InvalidReport(f"{source}: not a report document")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"{source}: report schema version {version!r}, this tool reads version {SCHEMA_VERSION}")
    try:
        diag = doc["diagnostics"]
        return AnalysisReport(
            corpus=doc["corpus"]["name"],
            date_range=doc["corpus"].get("date_range", ""),
            generated_at=doc["generated_at"],
            seed=doc["seed"],
            class_counts={ClassLabel(k): int(v) for k, v in doc["class_counts"].items()},
            vocabulary_size=int(doc["vocabulary_size"]),
            top_n=int(doc["top_n"]),
            scores=[
                FeatureScore(s["feature"], Category(s["category"]), float(s["h_dataset"]), float(s["h_conditional"]), float(s["ig"]))
                for s in doc["scores"]
            ],
            category_means={Category(k): float(v) for k, v in doc["category_means"].items()},
            diagnostics=Diagnostics(
                skipped_files=int(diag["skipped_files"]),
                oov_count=int(diag["oov_count"]),
                warnings=list(diag["warnings"]),
                skipped_by_kind={k: int(v) for k, v in diag.get("skipped_by_kind", {}).items()},
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidReport(f"{source}: malformed report ({exc!r})") from exc


def dumps_report(report: AnalysisReport) -> str:
    doc = report_to_dict(report)
    for value in doc["category_means"].values():
        if not math.isfinite(value):
            raise ValueError("non-finite category mean")
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_report(report: AnalysisReport, path: str | Path) -> None:
    text = dumps_report(report)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from exc


def load_report(path: str | Path) -> AnalysisReport:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read report {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise InvalidReport(f"{path}: not JSON ({exc})") from exc
    return report_from_dict(doc, str(path))
