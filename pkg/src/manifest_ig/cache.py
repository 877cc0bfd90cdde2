"""Line-oriented feature cache.

One JSON object per line::

    {"sha256": ..., "label": "malware"|"benign", "package": ...,
     "permissions": [...], "intents": [...], "parse_status": "ok"|<error kind>,
     "source_path": ..., "warnings": [...]}

Lines are independent, so caches can be concatenated with ``cat``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InvalidReport, IoFailure
from .features import ManifestFeatures
from .model import ClassLabel

log = logging.getLogger(__name__)

STATUS_OK = "ok"


@dataclass(frozen=True)
class CacheRecord:
    sha256: str
    label: ClassLabel
    package: str = ""
    permissions: tuple[str, ...] = ()
    intents: tuple[str, ...] = ()
    parse_status: str = STATUS_OK
    source_path: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def ok(self) -> bool:
        return self.parse_status == STATUS_OK

    @property
    def features(self) -> ManifestFeatures:
        return ManifestFeatures(self.package, frozenset(self.permissions), frozenset(self.intents))

    @classmethod
    def from_features(cls, features: ManifestFeatures, label: ClassLabel, sha256: str, source_path: str, warnings=()):
        return cls(
            sha256,
            label,
            features.app_id,
            tuple(sorted(features.permissions)),
            tuple(sorted(features.intents)),
            STATUS_OK,
            source_path,
            tuple(warnings),
        )

    def to_json(self) -> str:
        doc = {
            "sha256": self.sha256,
            "label": self.label.value,
            "package": self.package,
            "permissions": list(self.permissions),
            "intents": list(self.intents),
            "parse_status": self.parse_status,
            "source_path": self.source_path,
            "warnings": list(self.warnings),
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=False)

    @classmethod
    def from_json(cls, line: str) -> "CacheRecord":
        doc = json.loads(line)
        return cls(
            sha256=doc["sha256"],
            label=ClassLabel(doc["label"]),
            package=doc.get("package") or "",
            permissions=tuple(doc.get("permissions") or ()),
            intents=tuple(doc.get("intents") or ()),
            parse_status=doc.get("parse_status", STATUS_OK),
            source_path=doc.get("source_path", ""),
            warnings=tuple(doc.get("warnings") or ()),
        )


def read_cache(path: str | Path) -> Iterator[CacheRecord]:
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except FileNotFoundError:
        return
    except OSError as exc:
        raise IoFailure(f"cannot read cache {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield CacheRecord.from_json(line)
            except (ValueError, KeyError, TypeError) as exc:
                raise InvalidReport(f"{path}:{lineno}: bad cache record ({exc})") from exc


def append_cache(path: str | Path, records: Iterable[CacheRecord]) -> int:
    path = Path(path)
    n = 0
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(rec.to_json() + "\n")
                n += 1
    except OSError as exc:
        raise IoFailure(f"cannot write cache {path}: {exc}") from exc
    return n
