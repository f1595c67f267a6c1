"""
Structured values in functional notation.

This is the value universe shared by ``prolog_term`` rendering, the active
module wire format and the CLI's term text: integers, floats, strings,
atoms, lists, compound terms ``f(a1,...,an)`` and the anonymous
placeholder ``_``.
"""

import math
import re
from decimal import Decimal
from typing import Any, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from termweb.errors import TermSyntax

_BARE_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_NUMBER = re.compile(r"-?\d+(\.\d+)?([eE][+-]?\d+)?")
_NAME = re.compile(r"[a-z][A-Za-z0-9_]*")
_VARIABLE = re.compile(r"[A-Z_][A-Za-z0-9_]*")
_ESCAPES = {"\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", "n": "\n", "r": "\r", "t": "\t", '"': '"', "'": "'"}


class Atom(BaseModel):
    """A symbolic constant such as ``foo`` or ``'Hello world'``."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., description="Atom text")

    def __init__(self, name: str):
        super().__init__(name=name)

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


class Compound(BaseModel):
    """A structure ``functor(arg1, ..., argN)``."""

    model_config = ConfigDict(frozen=True)

    functor: str = Field(..., description="Name of the structure")
    args: Tuple[Any, ...] = Field(default=(), description="Argument values")

    def __init__(self, functor: str, args=()):
        super().__init__(functor=functor, args=tuple(args))

    @field_validator("functor")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("functor must not be empty")
        return value

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {list(self.args)!r})"


class Placeholder:
    """An unknown value, printed as ``_``. All placeholders are equal."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Placeholder)

    def __hash__(self) -> int:
        return hash("_")

    def __repr__(self) -> str:
        return "_"


PLACEHOLDER = Placeholder()


def _quote(text: str, quote: str) -> str:
    out = [quote]
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ch == quote:
            out.append("\\" + quote)
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append(quote)
    return "".join(out)


def atom_text(name: str) -> str:
    return name if _BARE_ATOM.match(name) else _quote(name, "'")


def term_text(value: Any) -> str:
    """
    Print a value in canonical functional notation.

    Args:
        value: Term value (see module docstring)

    Returns:
        Text that parse_term_text() reads back to an equal value
    """
    if isinstance(value, Placeholder):
        return "_"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise TermSyntax(f"cannot write non-finite number {value}")
        return format(value, "f")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise TermSyntax(f"cannot write non-finite number {value}")
        return repr(value)
    if isinstance(value, str):
        return _quote(value, '"')
    if isinstance(value, Atom):
        return atom_text(value.name)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(term_text(item) for item in value) + "]"
    if isinstance(value, Compound):
        return atom_text(value.functor) + "(" + ",".join(term_text(a) for a in value.args) + ")"
    raise TermSyntax(f"cannot write a {type(value).__name__} as a term")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise TermSyntax(f"expected {ch!r}", self.pos)
        self.pos += 1

    def quoted(self, quote: str) -> str:
        start = self.pos
        self.pos += 1
        out: List[str] = []
        while True:
            if self.pos >= len(self.text):
                raise TermSyntax("unterminated quoted text", start)
            ch = self.text[self.pos]
            if ch == quote:
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                nxt = self.text[self.pos + 1:self.pos + 2]
                if nxt in _UNESCAPES:
                    out.append(_UNESCAPES[nxt])
                    self.pos += 2
                elif nxt == "u" and re.fullmatch(r"[0-9a-fA-F]{4}", self.text[self.pos + 2:self.pos + 6]):
                    out.append(chr(int(self.text[self.pos + 2:self.pos + 6], 16)))
                    self.pos += 6
                else:
                    raise TermSyntax("bad escape", self.pos)
            else:
                out.append(ch)
                self.pos += 1

    def value(self) -> Any:
        ch = self.peek()
        if not ch:
            raise TermSyntax("unexpected end of term", self.pos)
        if ch == "[":
            self.pos += 1
            items = self.sequence("]")
            return items
        if ch == '"':
            return self.quoted('"')
        if ch == "'":
            return self.functor_or_atom(self.quoted("'"))
        number = _NUMBER.match(self.text, self.pos)
        if number:
            self.pos = number.end()
            token = number.group(0)
            if number.group(1) or number.group(2):
                return float(token)
            return int(token)
        variable = _VARIABLE.match(self.text, self.pos)
        if variable:
            self.pos = variable.end()
            return PLACEHOLDER
        name = _NAME.match(self.text, self.pos)
        if name:
            self.pos = name.end()
            return self.functor_or_atom(name.group(0))
        raise TermSyntax(f"unexpected character {ch!r}", self.pos)

    def functor_or_atom(self, name: str) -> Any:
        # No whitespace is allowed between a functor and its parenthesis
        if self.pos < len(self.text) and self.text[self.pos] == "(":
            self.pos += 1
            return Compound(name, self.sequence(")"))
        return Atom(name)

    def sequence(self, close: str) -> List[Any]:
        items: List[Any] = []
        if self.peek() == close:
            self.pos += 1
            return items
        while True:
            items.append(self.value())
            ch = self.peek()
            if ch == ",":
                self.pos += 1
            elif ch == close:
                self.pos += 1
                return items
            else:
                raise TermSyntax(f"expected ',' or {close!r}", self.pos)


def parse_term_text(text: str) -> Any:
    """
    Read one value written in functional notation.

    Raises:
        TermSyntax: the text is not exactly one well-formed term
    """
    reader = _Reader(text)
    value = reader.value()
    reader.skip_ws()
    if reader.pos != len(text):
        raise TermSyntax("trailing characters after term", reader.pos)
    return value
