"""Decoding of Android manifests, binary (AXML) or plain-text XML.

The binary format is a sequence of chunks, each introduced by a header::

    u16 type | u16 header_size | u32 total_size

The outer ``RES_XML_TYPE`` chunk holds a string pool, an optional resource-id
map and the stream of namespace/element chunks. Layouts follow
``frameworks/base/libs/androidfw/include/androidfw/ResourceTypes.h``.
"""

from __future__ import annotations

import logging
import struct
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import NotXml, StringIndexOutOfRange, TruncatedChunk, UnknownChunkType

log = logging.getLogger(__name__)

ANDROID_NS = "http://schemas.android.com/apk/res/android"

RES_NULL_TYPE = 0x0000
RES_STRING_POOL_TYPE = 0x0001
RES_XML_TYPE = 0x0003
RES_XML_START_NAMESPACE_TYPE = 0x0100
RES_XML_END_NAMESPACE_TYPE = 0x0101
RES_XML_START_ELEMENT_TYPE = 0x0102
RES_XML_END_ELEMENT_TYPE = 0x0103
RES_XML_CDATA_TYPE = 0x0104
RES_XML_RESOURCE_MAP_TYPE = 0x0180

UTF8_FLAG = 0x100
NO_INDEX = 0xFFFFFFFF

TYPE_NULL = 0x00
TYPE_REFERENCE = 0x01
TYPE_ATTRIBUTE = 0x02
TYPE_STRING = 0x03
TYPE_FLOAT = 0x04
TYPE_DIMENSION = 0x05
TYPE_FRACTION = 0x06
TYPE_FIRST_INT = 0x10
TYPE_INT_BOOLEAN = 0x12
TYPE_FIRST_COLOR_INT = 0x1C
TYPE_LAST_COLOR_INT = 0x1F
TYPE_LAST_INT = 0x1F

_DIMENSION_UNITS = ("px", "dip", "sp", "pt", "in", "mm")
_FRACTION_UNITS = ("%", "%p")
_RADIX_SHIFT = (23, 16, 8, 0)

# android.R.attr ids. The framework resolves attributes by id, not by the
# name string, so packers that scramble the strings still leave these intact.
ANDROID_ATTR_IDS = {
    0x01010000: "theme",
    0x01010001: "label",
    0x01010002: "icon",
    0x01010003: "name",
    0x01010006: "permission",
    0x01010009: "protectionLevel",
    0x0101000E: "enabled",
    0x0101000F: "debuggable",
    0x01010010: "exported",
    0x01010011: "process",
    0x01010018: "authorities",
    0x0101001C: "priority",
    0x01010027: "scheme",
    0x01010028: "host",
    0x0101020C: "minSdkVersion",
    0x0101021B: "versionCode",
    0x0101021C: "versionName",
    0x01010270: "targetSdkVersion",
    0x01010271: "maxSdkVersion",
}

_HEADER = struct.Struct("<HHL")
_POOL_HEADER = struct.Struct("<5L")
_NODE_HEADER = struct.Struct("<LL")
_NAMESPACE_EXT = struct.Struct("<LL")
_ELEMENT_EXT = struct.Struct("<LLHHHHHH")
_END_ELEMENT_EXT = struct.Struct("<LL")
_ATTRIBUTE = struct.Struct("<LLLHBBL")


# -- tree model ---------------------------------------------------------------


@dataclass(frozen=True)
class ResourceRef:
    """Reference to a resource (``@``) or theme attribute (``?``) by id."""

    res_id: int
    kind: str = "@"

    def __str__(self) -> str:
        return f"{self.kind}0x{self.res_id:08x}"


AttrValue = Union[str, bool, int, ResourceRef]


def value_text(value: AttrValue) -> str:
    """Canonical text of an attribute value."""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


@dataclass(frozen=True)
class Attribute:
    name: str
    namespace: str | None
    value: AttrValue

    @property
    def text(self) -> str:
        return value_text(self.value)


@dataclass
class Element:
    name: str
    namespace: str | None = None
    attributes: list[Attribute] = field(default_factory=list)
    children: list["Element"] = field(default_factory=list)

    def get(self, name: str, namespace: str | None = ANDROID_NS) -> AttrValue | None:
        for attr in self.attributes:
            if attr.name == name and attr.namespace == namespace:
                return attr.value
        return None

    def iter(self) -> Iterator["Element"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass
class XmlTree:
    root: Element
    # (prefix, uri) pairs in declaration order.
    namespaces: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list, compare=False)


# -- canonical text -----------------------------------------------------------


def _escape_attr(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("\t", "&#9;")
        .replace("\n", "&#10;")
        .replace("\r", "&#13;")
    )


def to_text(tree: XmlTree) -> str:
    """Serialize ``tree`` to canonical XML text (two-space indent, LF endings).

    All namespace declarations are emitted on the root element; a namespace
    used without a declaration gets a synthetic ``nsN`` prefix.
    """
    prefixes: dict[str, str] = {}
    decls: list[tuple[str, str]] = []
    for prefix, uri in tree.namespaces:
        if uri not in prefixes:
            prefixes[uri] = prefix
            decls.append((prefix, uri))
    for node in tree.root.iter():
        uris = [node.namespace] + [a.namespace for a in node.attributes]
        for uri in uris:
            if uri is not None and uri not in prefixes:
                prefix = "android" if uri == ANDROID_NS and "android" not in prefixes.values() else f"ns{len(decls)}"
                prefixes[uri] = prefix
                decls.append((prefix, uri))

    def qname(name: str, uri: str | None) -> str:
        if uri is None:
            return name
        prefix = prefixes[uri]
        return f"{prefix}:{name}" if prefix else name

    lines = ['<?xml version="1.0" encoding="utf-8"?>']

    def emit(node: Element, depth: int, extra: list[str]) -> None:
        pad = "  " * depth
        attrs = extra + [f'{qname(a.name, a.namespace)}="{_escape_attr(a.text)}"' for a in node.attributes]
        head = qname(node.name, node.namespace)
        if attrs:
            head += " " + " ".join(attrs)
        if not node.children:
            lines.append(f"{pad}<{head}/>")
            return
        lines.append(f"{pad}<{head}>")
        for child in node.children:
            emit(child, depth + 1, [])
        lines.append(f"{pad}</{qname(node.name, node.namespace)}>")

    xmlns = [
        (f'xmlns:{p}="{_escape_attr(u)}"' if p else f'xmlns="{_escape_attr(u)}"') for p, u in decls
    ]
    emit(tree.root, 0, xmlns)
    return "\n".join(lines) + "\n"


# -- plain-text XML -----------------------------------------------------------


def _split_qname(tag: str) -> tuple[str, str | None]:
    if tag.startswith("{"):
        uri, _, local = tag[1:].partition("}")
        return local, uri
    return tag, None


def parse_text(data: bytes) -> XmlTree:
    import io

    namespaces: list[tuple[str, str]] = []
    stack: list[Element] = []
    root: Element | None = None
    try:
        for event, item in ET.iterparse(io.BytesIO(data), events=("start-ns", "start", "end")):
            if event == "start-ns":
                namespaces.append((item[0], item[1]))
            elif event == "start":
                name, uri = _split_qname(item.tag)
                attrs = []
                for key, val in item.attrib.items():
                    aname, auri = _split_qname(key)
                    attrs.append(Attribute(aname, auri, val))
                node = Element(name, uri, attrs)
                if stack:
                    stack[-1].children.append(node)
                else:
                    root = node
                stack.append(node)
            else:
                stack.pop()
    except ET.ParseError as exc:
        raise NotXml(f"malformed XML: {exc}") from exc
    if root is None:
        raise NotXml("document has no root element")
    return XmlTree(root, namespaces)


# -- binary XML ---------------------------------------------------------------


def _decode_length8(buf: bytes, pos: int) -> tuple[int, int]:
    first = buf[pos]
    if first & 0x80:
        return ((first & 0x7F) << 8) | buf[pos + 1], pos + 2
    return first, pos + 1


def _decode_length16(buf: bytes, pos: int) -> tuple[int, int]:
    (first,) = struct.unpack_from("<H", buf, pos)
    if first & 0x8000:
        (second,) = struct.unpack_from("<H", buf, pos + 2)
        return ((first & 0x7FFF) << 16) | second, pos + 4
    return first, pos + 2


def read_string_pool(buf: bytes, start: int, header_size: int, size: int) -> list[str]:
    """Decode the strings of a string-pool chunk spanning ``buf[start:start+size]``."""
    end = start + size
    if header_size < _HEADER.size + _POOL_HEADER.size or start + header_size > end:
        raise TruncatedChunk("string pool header truncated")
    count, _styles, flags, strings_start, _styles_start = _POOL_HEADER.unpack_from(buf, start + _HEADER.size)
    offsets_at = start + header_size
    if offsets_at + 4 * count > end:
        raise TruncatedChunk("string pool offset table truncated")
    offsets = struct.unpack_from(f"<{count}L", buf, offsets_at)
    base = start + strings_start
    utf8 = bool(flags & UTF8_FLAG)
    strings = []
    for off in offsets:
        pos = base + off
        try:
            if utf8:
                _, pos = _decode_length8(buf, pos)  # utf-16 length, unused
                nbytes, pos = _decode_length8(buf, pos)
            else:
                nchars, pos = _decode_length16(buf, pos)
                nbytes = 2 * nchars
        except (IndexError, struct.error):
            raise TruncatedChunk("string pool entry truncated") from None
        if pos + nbytes > end:
            raise TruncatedChunk("string pool entry runs past chunk end")
        raw = buf[pos : pos + nbytes]
        strings.append(raw.decode("utf-8" if utf8 else "utf-16-le", errors="replace"))
    return strings


def _complex_to_float(data: int) -> float:
    mantissa = data >> 8
    if mantissa & 0x800000:
        mantissa -= 1 << 24
    return mantissa / (1 << _RADIX_SHIFT[(data >> 4) & 3])


def typed_value(data_type: int, data: int, raw: str | None) -> AttrValue:
    if data_type == TYPE_STRING:
        return raw if raw is not None else ""
    if data_type == TYPE_REFERENCE:
        return ResourceRef(data, "@")
    if data_type == TYPE_ATTRIBUTE:
        return ResourceRef(data, "?")
    if data_type == TYPE_INT_BOOLEAN:
        return data != 0
    if TYPE_FIRST_COLOR_INT <= data_type <= TYPE_LAST_COLOR_INT:
        return f"#{data:08x}"
    if TYPE_FIRST_INT <= data_type <= TYPE_LAST_INT:
        return data - (1 << 32) if data & 0x80000000 else data
    if data_type == TYPE_FLOAT:
        return repr(struct.unpack("<f", struct.pack("<L", data))[0])
    if data_type == TYPE_DIMENSION:
        unit = data & 0xF
        suffix = _DIMENSION_UNITS[unit] if unit < len(_DIMENSION_UNITS) else f"unit{unit}"
        return f"{_complex_to_float(data)!r}{suffix}"
    if data_type == TYPE_FRACTION:
        unit = data & 0xF
        suffix = _FRACTION_UNITS[unit] if unit < len(_FRACTION_UNITS) else f"unit{unit}"
        return f"{_complex_to_float(data) * 100!r}{suffix}"
    if data_type == TYPE_NULL:
        return raw if raw is not None else ""
    return f"0x{data:08x}"


class _BinaryDecoder:
    def __init__(self, buf: bytes, strict: bool):
        self.buf = buf
        self.strict = strict
        self.strings: list[str] = []
        self.resource_ids: list[int] = []
        self.namespaces: list[tuple[str, str]] = []
        self.warnings: list[str] = []

    def string(self, index: int) -> str:
        if index >= len(self.strings):
            raise StringIndexOutOfRange(f"string index {index} out of range (pool has {len(self.strings)})")
        return self.strings[index]

    def optional_string(self, index: int) -> str | None:
        return None if index == NO_INDEX else self.string(index)

    def attribute_name(self, index: int, namespace: str | None) -> str:
        if index < len(self.resource_ids) and namespace in (ANDROID_NS, None):
            known = ANDROID_ATTR_IDS.get(self.resource_ids[index])
            if known is not None:
                return known
        return self.string(index)

    def header(self, pos: int, limit: int) -> tuple[int, int, int]:
        if pos + _HEADER.size > limit:
            raise TruncatedChunk(f"chunk header at offset {pos} truncated")
        ctype, hsize, size = _HEADER.unpack_from(self.buf, pos)
        if size < _HEADER.size or hsize < _HEADER.size or hsize > size:
            raise TruncatedChunk(f"chunk at offset {pos} has inconsistent sizes")
        if pos + size > limit:
            raise TruncatedChunk(f"chunk at offset {pos} declares {size} bytes, only {limit - pos} remain")
        return ctype, hsize, size

    def decode(self) -> XmlTree:
        buf = self.buf
        ctype, hsize, total = self.header(0, len(buf))
        if ctype != RES_XML_TYPE:
            raise NotXml(f"outer chunk type 0x{ctype:04x} is not RES_XML_TYPE")
        pos = hsize
        stack: list[Element] = []
        root: Element | None = None
        while pos < total:
            ctype, chsize, size = self.header(pos, total)
            body = pos + chsize
            if ctype == RES_STRING_POOL_TYPE:
                if self.strings:
                    self.warnings.append(f"extra string pool at offset {pos} ignored")
                else:
                    self.strings = read_string_pool(buf, pos, chsize, size)
            elif ctype == RES_XML_RESOURCE_MAP_TYPE:
                n = (size - chsize) // 4
                self.resource_ids = list(struct.unpack_from(f"<{n}L", buf, body))
            elif ctype in (RES_XML_START_NAMESPACE_TYPE, RES_XML_END_NAMESPACE_TYPE):
                if body + _NAMESPACE_EXT.size > pos + size:
                    raise TruncatedChunk(f"namespace chunk at offset {pos} truncated")
                prefix_i, uri_i = _NAMESPACE_EXT.unpack_from(buf, body)
                if ctype == RES_XML_START_NAMESPACE_TYPE:
                    prefix = self.optional_string(prefix_i) or ""
                    self.namespaces.append((prefix, self.string(uri_i)))
            elif ctype == RES_XML_START_ELEMENT_TYPE:
                node = self.element(pos, body, size)
                if stack:
                    stack[-1].children.append(node)
                elif root is None:
                    root = node
                else:
                    raise NotXml("document has more than one root element")
                stack.append(node)
            elif ctype == RES_XML_END_ELEMENT_TYPE:
                if not stack:
                    raise NotXml(f"unbalanced end element at offset {pos}")
                stack.pop()
            elif ctype == RES_XML_CDATA_TYPE:
                pass
            else:
                msg = f"unknown chunk type 0x{ctype:04x} at offset {pos} skipped"
                if self.strict:
                    raise UnknownChunkType(msg)
                log.debug(msg)
                self.warnings.append(msg)
            pos += size
        if root is None:
            raise TruncatedChunk("binary XML ended before any element")
        if stack:
            raise TruncatedChunk(f"binary XML ended with {len(stack)} open element(s)")
        return XmlTree(root, self.namespaces, self.warnings)

    def element(self, pos: int, body: int, size: int) -> Element:
        end = pos + size
        if body + _ELEMENT_EXT.size > end:
            raise TruncatedChunk(f"element chunk at offset {pos} truncated")
        ns_i, name_i, attr_start, attr_size, attr_count, *_ = _ELEMENT_EXT.unpack_from(self.buf, body)
        attr_size = attr_size or _ATTRIBUTE.size
        first = body + attr_start
        if first + attr_count * attr_size > end:
            raise TruncatedChunk(f"attributes of element at offset {pos} truncated")
        attrs = []
        for k in range(attr_count):
            a_ns, a_name, a_raw, _, _, a_type, a_data = _ATTRIBUTE.unpack_from(self.buf, first + k * attr_size)
            namespace = self.optional_string(a_ns)
            raw = self.optional_string(a_raw)
            attrs.append(Attribute(self.attribute_name(a_name, namespace), namespace, typed_value(a_type, a_data, raw)))
        return Element(self.string(name_i), self.optional_string(ns_i), attrs)


def is_binary_xml(data: bytes) -> bool:
    return len(data) >= 2 and data[0] == RES_XML_TYPE and data[1] == 0


def decode_manifest(data: bytes, strict: bool = False) -> XmlTree:
    """Decode manifest bytes, binary or plain-text, into an :class:`XmlTree`.

    Unknown chunk types are skipped and recorded in ``tree.warnings`` unless
    ``strict`` is set, in which case they raise :class:`UnknownChunkType`.
    """
    if not data:
        raise NotXml("empty manifest")
    if is_binary_xml(data):
        return _BinaryDecoder(data, strict).decode()
    head = data.lstrip(b"\xef\xbb\xbf \t\r\n")
    if head.startswith(b"<") or head.startswith(b"\xff\xfe<") or head.startswith(b"\xfe\xff"):
        return parse_text(data)
    raise NotXml("neither binary XML nor XML text")
