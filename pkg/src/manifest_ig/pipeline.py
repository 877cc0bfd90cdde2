"""Corpus scanning, cached extraction and the analysis run."""

from __future__ import annotations

import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .apk import sha256_file
from .cache import CacheRecord, append_cache, read_cache
from .errors import EmptyVocabulary, ExtractionError, IoFailure, UsageError
from .features import extract_file
from .ig import category_means, rank_features
from .model import Category, ClassLabel, assemble_dataset, sample_balanced
from .report import AnalysisReport, Diagnostics

log = logging.getLogger(__name__)

STATUS_UNREADABLE = "Unreadable"


def scan_directory(root: str | Path) -> list[Path]:
    """Every regular file under ``root``, sorted by relative POSIX path."""
    root = Path(root)
    if not root.is_dir():
        raise UsageError(f"{root}: not a directory")
    if not os.access(root, os.R_OK | os.X_OK):
        raise IoFailure(f"{root}: directory not readable")
    files = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            p = Path(dirpath) / name
            if p.is_file():
                files.append(p)
    files.sort(key=lambda p: p.relative_to(root).as_posix())
    return files


def extract_one(path: str, label: str, sha256: str) -> CacheRecord:
    """Worker body: never raises for per-file problems, records them instead."""
    label_ = ClassLabel(label)
    try:
        features, source, warnings = extract_file(path)
    except ExtractionError as exc:
        return CacheRecord(sha256, label_, parse_status=exc.kind, source_path=path, warnings=(str(exc),))
    except OSError as exc:
        return CacheRecord(sha256, label_, parse_status=STATUS_UNREADABLE, source_path=path, warnings=(str(exc),))
    return CacheRecord.from_features(features, label_, source.sha256, path, warnings)


@dataclass
class ExtractionRun:
    """Result of scanning labeled files: one record per distinct sample, in scan order."""

    records: list[CacheRecord] = field(default_factory=list)
    new_records: int = 0
    cache_hits: int = 0
    duplicates: int = 0
    unreadable: int = 0
    warnings: list[str] = field(default_factory=list)

    def status_counts(self) -> Counter:
        return Counter(r.parse_status for r in self.records)


def run_extraction(
    labeled_files: Sequence[tuple[Path, ClassLabel]],
    cache_path: str | Path | None = None,
    jobs: int = 1,
) -> ExtractionRun:
    """Extract features for ``labeled_files``, reusing and extending the cache.

    Files whose digest is already cached (ok or not) are not re-extracted.
    Labels always come from ``labeled_files``; a digest seen twice in one run
    keeps its first placement.
    """
    cached: dict[str, CacheRecord] = {}
    if cache_path is not None:
        for rec in read_cache(cache_path):
            cached.setdefault(rec.sha256, rec)

    run = ExtractionRun()
    pending: list[tuple[int, str, str, str]] = []
    slots: list[CacheRecord | None] = []
    seen: dict[str, ClassLabel] = {}
    for path, label in labeled_files:
        try:
            sha = sha256_file(path)
        except OSError as exc:
            run.unreadable += 1
            run.warnings.append(f"{path}: unreadable ({exc.strerror or exc})")
            continue
        if sha in seen:
            run.duplicates += 1
            if seen[sha] is not label:
                run.warnings.append(f"{path}: same content already placed as {seen[sha].value}; ignored")
            continue
        seen[sha] = label
        if sha in cached:
            run.cache_hits += 1
            slots.append(_relabel(cached[sha], label))
        else:
            pending.append((len(slots), str(path), label.value, sha))
            slots.append(None)

    if pending:
        log.info("extracting %d file(s) with %d worker(s)", len(pending), max(jobs, 1))
        args = list(zip(*[(p, lab, sha) for _, p, lab, sha in pending]))
        if jobs > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(extract_one, *args, chunksize=max(1, len(pending) // (4 * jobs))))
        else:
            results = [extract_one(*a) for a in zip(*args)]
        new = []
        for (slot, *_), rec in zip(pending, results):
            slots[slot] = rec
            new.append(rec)
        if cache_path is not None:
            append_cache(cache_path, new)
        run.new_records = len(new)

    run.records = [r for r in slots if r is not None]
    return run


def _relabel(rec: CacheRecord, label: ClassLabel) -> CacheRecord:
    if rec.label is label:
        return rec
    return CacheRecord(rec.sha256, label, rec.package, rec.permissions, rec.intents, rec.parse_status, rec.source_path, rec.warnings)


def labeled_files(malware_dir, benign_dir) -> list[tuple[Path, ClassLabel]]:
    out: list[tuple[Path, ClassLabel]] = []
    for root, label in ((malware_dir, ClassLabel.MALWARE), (benign_dir, ClassLabel.BENIGN)):
        if root is not None:
            out.extend((p, label) for p in scan_directory(root))
    return out


def load_cached_records(cache_path: str | Path) -> tuple[list[CacheRecord], list[str]]:
    """Records of a cache for cache-only analysis, first occurrence of each digest winning."""
    records: list[CacheRecord] = []
    warnings: list[str] = []
    seen: set[str] = set()
    if not Path(cache_path).is_file():
        raise IoFailure(f"{cache_path}: cache file not found")
    for rec in read_cache(cache_path):
        if rec.sha256 in seen:
            warnings.append(f"cache: duplicate record for {rec.sha256} ignored")
            continue
        seen.add(rec.sha256)
        records.append(rec)
    return records, warnings


def source_date() -> str | None:
    """ISO timestamp from ``SOURCE_DATE_EPOCH``; ``None`` keeps reports byte-reproducible."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class AnalysisOptions:
    corpus: str = "corpus"
    n_per_class: int | None = None
    seed: int = 0
    top_n: int = 10
    min_support: int = 0
    category: Category | None = None
    namespace_categories: bool = False
    date_range: str = ""
    extra_vocabulary: Iterable[tuple[str, Category]] = ()


def analyze_records(
    records: Sequence[CacheRecord],
    opts: AnalysisOptions,
    warnings: Sequence[str] = (),
    unreadable: int = 0,
) -> AnalysisReport:
    """Sample, assemble, rank and summarize already-extracted records."""
    ok = [r for r in records if r.ok]
    skipped = Counter(r.parse_status for r in records if not r.ok)
    if unreadable:
        skipped[STATUS_UNREADABLE] += unreadable
    malware = [r for r in ok if r.label is ClassLabel.MALWARE]
    benign = [r for r in ok if r.label is ClassLabel.BENIGN]
    if opts.n_per_class is not None:
        malware, benign = sample_balanced(malware, benign, opts.n_per_class, opts.seed)
    chosen = malware + benign
    if not chosen:
        raise EmptyVocabulary("no successfully extracted samples to analyze")

    dataset = assemble_dataset(
        [(r.features, r.label, r.sha256) for r in chosen],
        namespace_categories=opts.namespace_categories,
        extra_vocabulary=opts.extra_vocabulary,
    )
    dataset = dataset.with_min_support(opts.min_support)
    if opts.category is not None:
        dataset = dataset.with_category(opts.category)
    if len(dataset.vocabulary) == 0:
        raise EmptyVocabulary("no features left to rank; check --min-support / --category")

    scores = rank_features(dataset)
    diag = Diagnostics(
        skipped_files=sum(skipped.values()),
        oov_count=dataset.oov_count,
        warnings=list(warnings) + sorted({w for r in chosen for w in r.warnings}),
        skipped_by_kind=dict(sorted(skipped.items())),
    )
    return AnalysisReport(
        corpus=opts.corpus,
        class_counts=dataset.class_counts,
        scores=scores,
        category_means=category_means(scores),
        seed=opts.seed,
        date_range=opts.date_range,
        top_n=opts.top_n,
        vocabulary_size=len(dataset.vocabulary),
        generated_at=source_date(),
        diagnostics=diag,
    )
