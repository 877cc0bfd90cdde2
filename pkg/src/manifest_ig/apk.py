"""APK container access: pull ``AndroidManifest.xml`` out of the ZIP."""

from __future__ import annotations

import hashlib
import struct
import zipfile
import zlib
from dataclasses import dataclass
from pathlib import Path

from .errors import DecompressionFailure, NoManifestEntry, NotAZip

MANIFEST_ENTRY = "AndroidManifest.xml"

_LOCAL_HEADER = struct.Struct("<4s5H3L2H")
_LOCAL_MAGIC = b"PK\x03\x04"


@dataclass(frozen=True)
class ApkSource:
    path: str
    sha256: str
    size_bytes: int

    @classmethod
    def from_bytes(cls, path: str | Path, data: bytes) -> "ApkSource":
        return cls(str(path), hashlib.sha256(data).hexdigest(), len(data))


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _raw_inflate(zf: zipfile.ZipFile, info: zipfile.ZipInfo, path: str) -> bytes:
    # Fallback for entries zipfile refuses (bogus method ids, fake encryption
    # bits): read the local header ourselves and inflate or copy the payload.
    fp = zf.fp
    fp.seek(info.header_offset)
    header = fp.read(_LOCAL_HEADER.size)
    if len(header) < _LOCAL_HEADER.size or header[:4] != _LOCAL_MAGIC:
        raise DecompressionFailure("bad local file header for manifest entry", path)
    fields = _LOCAL_HEADER.unpack(header)
    name_len, extra_len = fields[-2], fields[-1]
    fp.seek(info.header_offset + _LOCAL_HEADER.size + name_len + extra_len)
    payload = fp.read(info.compress_size)
    if info.compress_size == info.file_size:
        # Stored data mislabelled with another method.
        return payload
    try:
        return zlib.decompressobj(-15).decompress(payload)
    except zlib.error as exc:
        raise DecompressionFailure(f"cannot inflate manifest entry: {exc}", path) from exc


def read_manifest_entry(data: bytes, path: str = "<memory>") -> bytes:
    """Return the decompressed ``AndroidManifest.xml`` payload of an in-memory APK."""
    import io

    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except (zipfile.BadZipFile, zipfile.LargeZipFile, OSError, ValueError) as exc:
        raise NotAZip(f"not a ZIP container ({exc})", path) from exc
    with zf:
        try:
            info = zf.getinfo(MANIFEST_ENTRY)
        except KeyError:
            raise NoManifestEntry(f"no {MANIFEST_ENTRY} entry", path) from None
        try:
            return zf.read(info)
        except NotImplementedError:
            return _raw_inflate(zf, info, path)
        except RuntimeError:
            # "File is encrypted": malware sets the flag without encrypting.
            return _raw_inflate(zf, info, path)
        except (zipfile.BadZipFile, zlib.error, EOFError, OSError) as exc:
            raise DecompressionFailure(f"cannot read manifest entry: {exc}", path) from exc


def open_apk(path: str | Path) -> tuple[bytes, ApkSource]:
    """Read the APK at ``path`` and return its raw manifest bytes and identity."""
    path = Path(path)
    data = path.read_bytes()
    source = ApkSource.from_bytes(path, data)
    return read_manifest_entry(data, str(path)), source
