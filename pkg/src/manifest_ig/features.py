"""Permission and intent features of a single manifest."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .apk import ApkSource, read_manifest_entry
from .axml import ANDROID_NS, Element, XmlTree, decode_manifest, is_binary_xml
from .errors import ExtractionError, NotAManifest

PERMISSION_TAGS = frozenset({"uses-permission", "uses-permission-sdk-23", "uses-permission-sdk-m"})
INTENT_TAGS = frozenset({"action", "category"})


@dataclass(frozen=True)
class ManifestFeatures:
    app_id: str
    permissions: frozenset[str] = field(default_factory=frozenset)
    intents: frozenset[str] = field(default_factory=frozenset)


def _name_of(node: Element) -> str | None:
    value = node.get("name", ANDROID_NS)
    if value is None:
        # Hand-written fixtures sometimes omit the android: prefix.
        value = next((a.value for a in node.attributes if a.name == "name"), None)
    if isinstance(value, str) and value:
        return value
    return None


def extract_features(tree: XmlTree) -> ManifestFeatures:
    root = tree.root
    if root.name != "manifest":
        raise NotAManifest(f"root element is <{root.name}>, expected <manifest>")
    permissions: set[str] = set()
    intents: set[str] = set()
    for node in root.iter():
        if node.name in PERMISSION_TAGS:
            name = _name_of(node)
            if name:
                permissions.add(name)
        elif node.name == "intent-filter":
            for child in node.children:
                if child.name in INTENT_TAGS:
                    name = _name_of(child)
                    if name:
                        intents.add(name)
    package = root.get("package", None)
    app_id = package if isinstance(package, str) else ""
    return ManifestFeatures(app_id, frozenset(permissions), frozenset(intents))


def looks_like_manifest_file(path: Path, head: bytes) -> bool:
    """True when a corpus file should be read as a bare manifest, not an APK."""
    if head.startswith(b"PK"):
        return False
    if path.suffix.lower() == ".apk":
        return False
    return path.suffix.lower() == ".xml" or is_binary_xml(head) or head.lstrip(b"\xef\xbb\xbf \t\r\n").startswith(b"<")


def extract_file(path: str | Path) -> tuple[ManifestFeatures, ApkSource, list[str]]:
    """Run the whole per-file pipeline on an APK or a bare manifest file.

    Returns the features, the file identity and any decoder warnings. Any
    :class:`ExtractionError` raised is tagged with ``path``.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
        source = ApkSource.from_bytes(path, data)
        if looks_like_manifest_file(path, data[:64]):
            manifest = data
        else:
            manifest = read_manifest_entry(data, str(path))
        tree = decode_manifest(manifest)
        return extract_features(tree), source, list(tree.warnings)
    except ExtractionError as exc:
        raise exc.with_path(str(path))
