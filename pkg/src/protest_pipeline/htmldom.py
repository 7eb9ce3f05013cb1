"""Tolerant HTML tree built on the stdlib parser.

Real news pages are full of unclosed tags and stray markup; the parser
never raises, auto-closes misnested elements against a small rule set,
and exposes just enough of a DOM for link discovery and text scoring.
"""

from __future__ import annotations

import re
from html.parser import HTMLParser
from typing import Iterator

VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Starting one of these implicitly closes an open element of the same tag.
_SELF_CLOSING_SIBLINGS = frozenset("p li dt dd tr td th option".split())

RAW_TEXT_TAGS = frozenset(("script", "style"))

_CHARSET_RE = re.compile(rb"""charset\s*=\s*["']?\s*([a-zA-Z0-9_.:-]+)""")

_WS_RE = re.compile(r"\s+")


def normalize_ws(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


class Element:
    __slots__ = ("tag", "attrs", "children", "parent", "order")

    def __init__(self, tag: str, attrs: dict[str, str], parent: "Element | None", order: int):
        self.tag = tag
        self.attrs = attrs
        self.children: list[Element | str] = []
        self.parent = parent
        self.order = order

    def __repr__(self) -> str:
        return f"<Element {self.tag} order={self.order} children={len(self.children)}>"

    def iter(self) -> Iterator["Element"]:
        """Depth-first pre-order over descendant elements, including self."""
        yield self
        for child in self.children:
            if isinstance(child, Element):
                yield from child.iter()

    def find_all(self, tag: str) -> list["Element"]:
        return [el for el in self.iter() if el.tag == tag]

    def get(self, name: str, default: str | None = None) -> str | None:
        return self.attrs.get(name, default)

    @property
    def depth(self) -> int:
        depth = 0
        node = self.parent
        while node is not None:
            depth += 1
            node = node.parent
        return depth

    def text_content(self, skip: frozenset[str] = RAW_TEXT_TAGS) -> str:
        """Whitespace-normalized text of the subtree, skipping raw-text tags."""
        parts: list[str] = []
        self._collect_text(parts, skip)
        return normalize_ws(" ".join(parts))

    def _collect_text(self, parts: list[str], skip: frozenset[str]) -> None:
        for child in self.children:
            if isinstance(child, str):
                parts.append(child)
            elif child.tag not in skip:
                child._collect_text(parts, skip)


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Element("document", {}, None, 0)
        self.stack = [self.root]
        self.counter = 0

    def _open(self, tag: str, attrs: list[tuple[str, str | None]]) -> Element:
        self.counter += 1
        node = Element(
            tag,
            {k: (v if v is not None else "") for k, v in attrs},
            self.stack[-1],
            self.counter,
        )
        self.stack[-1].children.append(node)
        return node

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        tag = tag.lower()
        if tag in _SELF_CLOSING_SIBLINGS and self.stack[-1].tag == tag:
            self.stack.pop()
        node = self._open(tag, attrs)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        self._open(tag.lower(), attrs)

    def handle_endtag(self, tag: str) -> None:
        tag = tag.lower()
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # Stray end tag: ignore.

    def handle_data(self, data: str) -> None:
        if data:
            self.stack[-1].children.append(data)


def decode_html(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    match = _CHARSET_RE.search(data[:4096])
    if match:
        try:
            return data.decode(match.group(1).decode("ascii"), errors="replace")
        except LookupError:
            pass
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return data.decode("latin-1")


def parse_html(data: bytes | str) -> Element:
    """Parse HTML into an element tree; malformed markup never raises."""
    builder = _TreeBuilder()
    try:
        builder.feed(decode_html(data))
        builder.close()
    except Exception:
        # Whatever was built so far is still usable.
        pass
    return builder.root
