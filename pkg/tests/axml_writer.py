"""Minimal binary-XML (AXML) encoder used to build test fixtures.

Written straight from the chunk layouts in androidfw's ResourceTypes.h and
kept independent of the package's decoder.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

ANDROID_NS = "http://schemas.android.com/apk/res/android"
NO_INDEX = 0xFFFFFFFF

ATTR_IDS = {
    "label": 0x01010001,
    "icon": 0x01010002,
    "name": 0x01010003,
    "permission": 0x01010006,
    "enabled": 0x0101000E,
    "exported": 0x01010010,
    "priority": 0x0101001C,
    "scheme": 0x01010027,
    "minSdkVersion": 0x0101020C,
    "versionCode": 0x0101021B,
    "versionName": 0x0101021C,
    "targetSdkVersion": 0x01010270,
}


@dataclass(frozen=True)
class Ref:
    res_id: int


@dataclass
class E:
    name: str
    attrs: list = field(default_factory=list)  # (namespace uri or None, name, value)
    children: list = field(default_factory=list)
    ns: str | None = None


def _len8(n: int) -> bytes:
    if n < 0x80:
        return bytes([n])
    return bytes([0x80 | (n >> 8), n & 0xFF])


def _len16(n: int) -> bytes:
    if n < 0x8000:
        return struct.pack("<H", n)
    return struct.pack("<HH", 0x8000 | (n >> 16), n & 0xFFFF)


def string_pool(strings: list[str], utf8: bool) -> bytes:
    offsets, data = [], b""
    for s in strings:
        offsets.append(len(data))
        if utf8:
            raw = s.encode("utf-8")
            data += _len8(len(s.encode("utf-16-le")) // 2) + _len8(len(raw)) + raw + b"\x00"
        else:
            raw = s.encode("utf-16-le")
            data += _len16(len(raw) // 2) + raw + b"\x00\x00"
    data += b"\x00" * (-len(data) % 4)
    header_size = 28
    strings_start = header_size + 4 * len(strings)
    size = strings_start + len(data)
    head = struct.pack("<HHL5L", 0x0001, header_size, size, len(strings), 0, 0x100 if utf8 else 0, strings_start, 0)
    return head + struct.pack(f"<{len(strings)}L", *offsets) + data


def _typed(value, pool) -> tuple[int, int, int]:
    """(raw string index, data type, data)."""
    if isinstance(value, bool):
        return NO_INDEX, 0x12, 0xFFFFFFFF if value else 0
    if isinstance(value, int):
        return NO_INDEX, 0x10, value & 0xFFFFFFFF
    if isinstance(value, Ref):
        return NO_INDEX, 0x01, value.res_id
    idx = pool(value)
    return idx, 0x03, idx


def encode(
    root: E,
    namespaces=(("android", ANDROID_NS),),
    utf8: bool = False,
    scramble_attr_names: bool = False,
    extra_chunk: bytes | None = None,
) -> bytes:
    """Encode an element tree as binary XML.

    Attribute names that have a framework resource id are placed first in the
    string pool and listed in the resource map, as aapt does. With
    ``scramble_attr_names`` those name strings are replaced by junk, which only
    a decoder honouring the resource map can undo. ``extra_chunk`` is inserted
    right after the resource map.
    """
    resource_names: list[str] = []

    def walk(e: E):
        yield e
        for c in e.children:
            yield from walk(c)

    for e in walk(root):
        for ns, name, _ in e.attrs:
            if ns == ANDROID_NS and name in ATTR_IDS and name not in resource_names:
                resource_names.append(name)
    strings: list[str] = [f"§{i}" if scramble_attr_names else n for i, n in enumerate(resource_names)]
    index: dict[str, int] = {}
    # Resource-mapped names are looked up by position, others by value.

    def pool(s: str) -> int:
        if s not in index:
            index[s] = len(strings)
            strings.append(s)
        return index[s]

    def attr_name_index(ns, name) -> int:
        if ns == ANDROID_NS and name in ATTR_IDS:
            return resource_names.index(name)
        return pool(name)

    body = b""
    for prefix, uri in namespaces:
        body += struct.pack("<HHL4L", 0x0100, 16, 24, 1, NO_INDEX, pool(prefix), pool(uri))

    def element(e: E, line: int) -> bytes:
        attrs = b""
        for ns, name, value in e.attrs:
            raw, dtype, data = _typed(value, pool)
            ns_i = NO_INDEX if ns is None else pool(ns)
            attrs += struct.pack("<LLLHBBL", ns_i, attr_name_index(ns, name), raw, 8, 0, dtype, data)
        ns_i = NO_INDEX if e.ns is None else pool(e.ns)
        name_i = pool(e.name)
        size = 16 + 20 + len(attrs)
        out = struct.pack("<HHLLL", 0x0102, 16, size, line, NO_INDEX)
        out += struct.pack("<LLHHHHHH", ns_i, name_i, 20, 20, len(e.attrs), 0, 0, 0) + attrs
        for c in e.children:
            out += element(c, line + 1)
        out += struct.pack("<HHLLLLL", 0x0103, 16, 24, line, NO_INDEX, ns_i, name_i)
        return out

    body += element(root, 1)
    for prefix, uri in reversed(list(namespaces)):
        body += struct.pack("<HHL4L", 0x0101, 16, 24, 1, NO_INDEX, pool(prefix), pool(uri))

    res_map = b""
    if resource_names:
        ids = [ATTR_IDS[n] for n in resource_names]
        res_map = struct.pack("<HHL", 0x0180, 8, 8 + 4 * len(ids)) + struct.pack(f"<{len(ids)}L", *ids)
    payload = string_pool(strings, utf8) + res_map + (extra_chunk or b"") + body
    return struct.pack("<HHL", 0x0003, 8, 8 + len(payload)) + payload


def unknown_chunk(type_id: int = 0x0777, payload: bytes = b"\xde\xad\xbe\xef" * 3) -> bytes:
    return struct.pack("<HHL", type_id, 8, 8 + len(payload)) + payload
