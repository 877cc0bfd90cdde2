"""Exception hierarchy.

Every error carries the CLI exit code it maps to. Extraction errors also carry
the offending path (when known) so corpus scans can skip and count them.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class ManifestIGError(Exception):
    exit_code = EXIT_DATA

    @property
    def kind(self) -> str:
        return type(self).__name__


class UsageError(ManifestIGError):
    exit_code = EXIT_USAGE


class IoFailure(ManifestIGError):
    exit_code = EXIT_IO


# -- extraction -------------------------------------------------------------


class ExtractionError(ManifestIGError):
    """A single sample could not be turned into manifest features."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)

    def with_path(self, path: str) -> "ExtractionError":
        if self.path is None:
            self.path = path
            self.args = (f"{path}: {self.args[0]}",)
        return self


class NotAZip(ExtractionError):
    pass


class NoManifestEntry(ExtractionError):
    pass


class DecompressionFailure(ExtractionError):
    pass


class TruncatedChunk(ExtractionError):
    pass


class UnknownChunkType(ExtractionError):
    """Raised only in strict mode; otherwise the chunk is skipped with a warning."""


class StringIndexOutOfRange(ExtractionError):
    pass


class NotXml(ExtractionError):
    pass


class NotAManifest(ExtractionError):
    pass


# -- dataset / scoring --------------------------------------------------------


class NameCollisionAcrossCategories(ManifestIGError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(
            f"{name!r} appears both as a permission and as an intent; "
            "re-run with --namespace-categories to keep both"
        )


class DuplicateSample(ManifestIGError):
    def __init__(self, sha256: str):
        self.sha256 = sha256
        super().__init__(f"sample {sha256} appears more than once")


class PoolTooSmall(ManifestIGError):
    def __init__(self, label, have: int, need: int):
        self.label = label
        self.have = have
        self.need = need
        name = getattr(label, "display", str(label))
        super().__init__(
            f"{name} pool has {have} usable samples but {need} were requested; "
            "lower --n-per-class or add samples"
        )


class EmptyVocabulary(ManifestIGError):
    def __init__(self, message: str = "no features to rank (empty vocabulary)"):
        super().__init__(message)


class ZeroTotal(ManifestIGError):
    def __init__(self):
        super().__init__("class distribution has zero total")


class LengthMismatch(ManifestIGError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"column has {got} values, dataset has {expected} instances")


class InvalidReport(ManifestIGError):
    pass


class SchemaVersionError(InvalidReport):
    pass
