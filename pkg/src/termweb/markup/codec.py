"""
Markup text <-> markup terms.

``render`` expands and normalizes a term and writes it as HTML (or XML);
``parse`` reads HTML (or XML) into a normalized term list. The parser is a
small tokenizer plus an open-tag stack:

- void elements (img, br, hr ...) become elements, matched tag pairs
  environments, everything else text, comments and declarations;
- an end tag with no open counterpart is dropped;
- environments still open when an enclosing one closes, or at end of
  input, are closed there.

There is no tag omission inference: ``<p>a<p>b`` nests. In XML mode names
keep their case and any mismatch raises XmlSyntax.
"""

import io
import logging
import re
import sys
from enum import Enum
from typing import Any, IO, Iterator, List, Optional, Set, Tuple, Union

from termweb.errors import XmlSyntax
from termweb.markup.entities import decode_entities, escape_attr, escape_text
from termweb.markup.model import (
    ATTR_NAME, TAG_NAME, Comment, Declaration, Element, Environment, Flag, Raw, Text, normalize_items,
)
from termweb.markup.sugar import ExpansionRegistry, expand

logger = logging.getLogger(__name__)

VOID_ELEMENTS = frozenset({"img", "br", "hr", "input", "meta", "link", "base", "area", "param"})

_NAME = TAG_NAME
_ATTR = rf"""({ATTR_NAME})(?:\s*=\s*("[^"]*"|'[^']*'|[^\s>"']+))?"""
_START_TAG = re.compile(rf"<(?P<name>{_NAME})(?P<attrs>(?:\s+{_ATTR})*)\s*(?P<slash>/?)>")
_END_TAG = re.compile(rf"</({_NAME})\s*>")
_ATTR_RE = re.compile(_ATTR)


class Dialect(str, Enum):
    HTML = "html"
    XML = "xml"


# Rendering -------------------------------------------------------------------

def _attr_text(attrs: Tuple[Any, ...], dialect: Dialect) -> str:
    parts = []
    for attr in attrs:
        if isinstance(attr, Flag):
            parts.append(f' {attr.name}="{attr.name}"' if dialect is Dialect.XML else f" {attr.name}")
        else:
            parts.append(f' {attr.name}="{escape_attr(attr.value)}"')
    return "".join(parts)


def _serialize(node: Any, dialect: Dialect) -> Iterator[str]:
    if isinstance(node, Text):
        yield escape_text(node.content)
    elif isinstance(node, Element):
        close = "/>" if dialect is Dialect.XML else ">"
        yield f"<{node.name}{_attr_text(node.attrs, dialect)}{close}"
    elif isinstance(node, Environment):
        yield f"<{node.name}{_attr_text(node.attrs, dialect)}>"
        for child in node.body:
            yield from _serialize(child, dialect)
        yield f"</{node.name}>"
    elif isinstance(node, Comment):
        yield f"<!--{node.content}-->"
    elif isinstance(node, Declaration):
        # Processing instructions keep their leading "?"
        yield f"<{node.content}>" if node.content.startswith("?") else f"<!{node.content}>"
    elif isinstance(node, Raw):
        yield node.content
    else:
        raise TypeError(f"cannot serialize {type(node).__name__}")


def iter_render(term: Any, dialect: Dialect = Dialect.HTML,
                registry: Optional[ExpansionRegistry] = None) -> Iterator[str]:
    """Yield the rendering of ``term`` chunk by chunk (expand, normalize, serialize)."""
    items = normalize_items(expand(term, registry))
    for node in items:
        yield from _serialize(node, Dialect(dialect))


def render(term: Any, dialect: Dialect = Dialect.HTML, registry: Optional[ExpansionRegistry] = None) -> str:
    """
    Render a markup term, sugar included, as text.

    Attribute values are always double-quoted. Flags are bare in HTML and
    ``name="name"`` in XML; XML elements are self-closing.

    Raises:
        UnboundSlot: the term still has an unbound slot
        MalformedSugar: a sugar constructor has bad arguments
    """
    return "".join(iter_render(term, dialect, registry))


def render_to_stream(term: Any, sink: IO, dialect: Dialect = Dialect.HTML,
                     registry: Optional[ExpansionRegistry] = None) -> None:
    """
    Write the rendering of ``term`` to ``sink`` incrementally.

    Text sinks receive strings. Binary sinks receive Latin-1 bytes, with
    characters outside Latin-1 written as numeric references.
    """
    binary = not isinstance(sink, io.TextIOBase)
    for chunk in iter_render(term, dialect, registry):
        sink.write(chunk.encode("latin-1", "xmlcharrefreplace") if binary else chunk)
    if hasattr(sink, "flush"):
        sink.flush()


# Parsing ---------------------------------------------------------------------

class _Open:
    __slots__ = ("name", "attrs", "children")

    def __init__(self, name: str, attrs: Tuple[Any, ...]):
        self.name = name
        self.attrs = attrs
        self.children: List[Any] = []


def _append(children: List[Any], node: Any) -> None:
    if isinstance(node, Text):
        if not node.content:
            return
        if children and isinstance(children[-1], Text):
            children[-1] = Text(content=children[-1].content + node.content)
            return
    children.append(node)


class _TreeBuilder:
    """
    Builds the normalized term list from a token stream.

    ``implicit`` holds the ids of environments that were closed without
    their own end tag; template parsing uses it to spot unclosed slots.
    """

    def __init__(self, dialect: Dialect):
        self.dialect = dialect
        self.top: List[Any] = []
        self.stack: List[_Open] = []
        self.implicit: Set[int] = set()

    def _children(self) -> List[Any]:
        return self.stack[-1].children if self.stack else self.top

    def _fold(self, name: str) -> str:
        return name.lower() if self.dialect is Dialect.HTML else name

    def add(self, node: Any) -> None:
        _append(self._children(), node)

    def _close(self, explicit: bool) -> None:
        opened = self.stack.pop()
        node = Environment(name=opened.name, attrs=opened.attrs, body=opened.children)
        if not explicit:
            self.implicit.add(id(node))
        self.add(node)

    def start(self, name: str, attrs: Tuple[Any, ...], self_closing: bool, offset: int) -> None:
        name = self._fold(name)
        if self.dialect is Dialect.HTML:
            if name in VOID_ELEMENTS:
                self.add(Element(name=name, attrs=attrs))
                return
        elif self_closing:
            self.add(Element(name=name, attrs=attrs))
            return
        self.stack.append(_Open(name, attrs))

    def end(self, name: str, offset: int) -> None:
        name = self._fold(name)
        depth = next((i for i in range(len(self.stack) - 1, -1, -1) if self.stack[i].name == name), None)
        if self.dialect is Dialect.XML:
            if depth is None or depth != len(self.stack) - 1:
                raise XmlSyntax(f"unexpected </{name}>", offset)
            self._close(explicit=True)
            return
        if depth is None:
            logger.debug("dropping unmatched </%s> at offset %d", name, offset)
            return
        while len(self.stack) - 1 > depth:
            self._close(explicit=False)
        self._close(explicit=True)

    def finish(self, offset: int) -> List[Any]:
        if self.stack and self.dialect is Dialect.XML:
            raise XmlSyntax(f"<{self.stack[-1].name}> is never closed", offset)
        while self.stack:
            self._close(explicit=False)
        return self.top


def _parse_attrs(text: str, dialect: Dialect) -> Tuple[Any, ...]:
    attrs = []
    for match in _ATTR_RE.finditer(text):
        name, value = match.group(1), match.group(2)
        if dialect is Dialect.HTML:
            name = name.lower()
        if value is None:
            attrs.append(Flag(name=name))
            continue
        if value[:1] in ("'", '"'):
            value = value[1:-1]
        attrs.append((name, decode_entities(value)))
    return tuple(attrs)


def _feed(text: str, builder: _TreeBuilder) -> None:
    pos = 0
    size = len(text)
    pending: List[str] = []

    def flush_text() -> None:
        if pending:
            builder.add(Text(content=decode_entities("".join(pending))))
            pending.clear()

    while pos < size:
        lt = text.find("<", pos)
        if lt < 0:
            pending.append(text[pos:])
            break
        if lt > pos:
            pending.append(text[pos:lt])
        pos = lt

        if text.startswith("<!--", pos):
            # An unterminated comment is left as text
            close = text.find("-->", pos + 4)
            if close >= 0:
                flush_text()
                builder.add(Comment(content=text[pos + 4:close]))
                pos = close + 3
                continue
        elif text.startswith("<!", pos) or text.startswith("<?", pos):
            close = text.find(">", pos)
            if close >= 0:
                flush_text()
                content = text[pos + 1:close] if text[pos + 1] == "?" else text[pos + 2:close]
                builder.add(Declaration(content=content))
                pos = close + 1
                continue
        elif text.startswith("</", pos):
            match = _END_TAG.match(text, pos)
            if match:
                flush_text()
                builder.end(match.group(1), pos)
                pos = match.end()
                continue
        else:
            match = _START_TAG.match(text, pos)
            if match:
                flush_text()
                attrs = _parse_attrs(match.group("attrs"), builder.dialect)
                builder.start(match.group("name"), attrs, bool(match.group("slash")), pos)
                pos = match.end()
                continue
        # Not markup after all: a literal "<"
        pending.append("<")
        pos += 1
    flush_text()


def _as_text(data: Union[str, bytes, bytearray]) -> str:
    if isinstance(data, (bytes, bytearray)):
        return bytes(data).decode("latin-1")
    return data


def parse_with_builder(data: Union[str, bytes], dialect: Dialect = Dialect.HTML) -> _TreeBuilder:
    text = _as_text(data)
    builder = _TreeBuilder(Dialect(dialect))
    _feed(text, builder)
    builder.finish(len(text))
    return builder


def parse(data: Union[str, bytes], dialect: Dialect = Dialect.HTML) -> List[Any]:
    """
    Read markup text into a normalized term list.

    Bytes are read as Latin-1. In HTML mode this never raises; in XML mode
    tag mismatches raise XmlSyntax.
    """
    return parse_with_builder(data, dialect).top


def html2terms(data: Union[str, bytes]) -> List[Any]:
    return parse(data, Dialect.HTML)


def xml2terms(data: Union[str, bytes]) -> List[Any]:
    return parse(data, Dialect.XML)


def output_html(term: Any, sink: Optional[IO] = None) -> None:
    """Write ``term`` as HTML to ``sink`` (standard output by default)."""
    render_to_stream(term, sink if sink is not None else sys.stdout)
