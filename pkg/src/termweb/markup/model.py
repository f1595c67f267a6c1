"""
Markup documents as terms.

A document is a tree of immutable nodes: text, elements (no body),
environments (with body), comments, declarations, raw fragments, slots and
sequences. Slots hold a ``SlotRef``, a write-once cell that plays the role
of a logic variable: a term can be built first and filled in later, as long
as every slot is bound before the term is normalized or rendered.

Sugar nodes (``Sugar``) stand for the specific structures of the sugar
table; ``termweb.markup.sugar.expand`` rewrites them into core nodes.
"""

import itertools
import re
import threading
from typing import Any, Iterable, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from termweb.errors import AlreadyBound, MalformedSugar, UnboundSlot

# Shared with the codec's tokenizer: any name accepted here parses back.
TAG_NAME = r"[A-Za-z][^\s/<>&\"'=]*"
ATTR_NAME = r"[^\s/<>\"'=&]+"

_TAG_NAME_RE = re.compile(TAG_NAME)
_ATTR_NAME_RE = re.compile(ATTR_NAME)


def _check_name(value: str) -> str:
    if not _TAG_NAME_RE.fullmatch(value):
        raise ValueError(f"invalid markup name {value!r}")
    return value


def _check_attr_name(value: str) -> str:
    if not _ATTR_NAME_RE.fullmatch(value):
        raise ValueError(f"invalid attribute name {value!r}")
    return value


class SlotRef:
    """
    A bindable cell with its own identity.

    Equality is identity, whether or not the slot is bound. Binding is
    write-once and serialized: when several threads race, exactly one wins
    and the others get AlreadyBound.
    """

    _ids = itertools.count(1)

    def __init__(self, name: Optional[str] = None):
        self.id = next(SlotRef._ids)
        self.name = name
        self._binding: Any = None
        self._bound = False
        self._lock = threading.Lock()

    @property
    def bound(self) -> bool:
        return self._bound

    @property
    def binding(self) -> Any:
        return self._binding

    def bind(self, value: Any) -> None:
        term = as_term(value)
        with self._lock:
            if self._bound:
                raise AlreadyBound(self)
            self._binding = term
            self._bound = True

    def __repr__(self) -> str:
        label = f"{self.name}#{self.id}" if self.name else f"#{self.id}"
        return f"SlotRef({label})"


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Flag(_Node):
    """A boolean attribute such as ``ismap``."""

    name: str = Field(..., description="Attribute name")

    @field_validator("name")
    @classmethod
    def _valid_name(cls, value: str) -> str:
        return _check_attr_name(value)


class Pair(_Node):
    """An attribute assignment ``name="value"``."""

    name: str = Field(..., description="Attribute name")
    value: str = Field(..., description="Attribute value (unescaped)")

    @field_validator("name")
    @classmethod
    def _valid_name(cls, value: str) -> str:
        return _check_attr_name(value)


Attr = Union[Flag, Pair]


def as_attr(value: Any) -> Attr:
    """Accept Flag/Pair, a bare name, a (name, value) pair or a 'name=value' tuple."""
    if isinstance(value, (Flag, Pair)):
        return value
    if isinstance(value, str):
        return Flag(name=value)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        name, val = value
        return Pair(name=str(name), value=val if isinstance(val, str) else str(val))
    raise ValueError(f"not an attribute: {value!r}")


def as_attrs(values: Any) -> Tuple[Attr, ...]:
    if values is None:
        return ()
    if isinstance(values, dict):
        values = list(values.items())
    if isinstance(values, (str, Flag, Pair)):
        values = [values]
    return tuple(as_attr(v) for v in values)


class Text(_Node):
    content: str = Field(..., description="Character data (unescaped)")


class Element(_Node):
    """A tag without body, e.g. ``<img src="a.gif">``."""

    name: str = Field(..., description="Element name")
    attrs: Tuple[Attr, ...] = Field(default=(), description="Attributes in document order")

    @field_validator("name")
    @classmethod
    def _valid_name(cls, value: str) -> str:
        return _check_name(value)

    @field_validator("attrs", mode="before")
    @classmethod
    def _coerce_attrs(cls, value: Any) -> Tuple[Attr, ...]:
        return as_attrs(value)


class Environment(_Node):
    """A tag pair with a body, e.g. ``<a href="x">text</a>``."""

    name: str = Field(..., description="Environment name")
    attrs: Tuple[Attr, ...] = Field(default=(), description="Attributes in document order")
    body: Tuple[Any, ...] = Field(default=(), description="Child terms")

    @field_validator("name")
    @classmethod
    def _valid_name(cls, value: str) -> str:
        return _check_name(value)

    @field_validator("attrs", mode="before")
    @classmethod
    def _coerce_attrs(cls, value: Any) -> Tuple[Attr, ...]:
        return as_attrs(value)

    @field_validator("body", mode="before")
    @classmethod
    def _coerce_body(cls, value: Any) -> Tuple[Any, ...]:
        return as_items(value)


class Comment(_Node):
    content: str = Field(..., description="Comment text between <!-- and -->")

    @field_validator("content")
    @classmethod
    def _no_terminator(cls, value: str) -> str:
        if "-->" in value:
            raise ValueError("comment content cannot contain '-->'")
        return value


class Declaration(_Node):
    content: str = Field(..., description="Text between <! and >, or a <?...?> instruction")

    @field_validator("content")
    @classmethod
    def _no_terminator(cls, value: str) -> str:
        # "<!--" would start a comment instead
        if ">" in value or value.startswith("--"):
            raise ValueError(f"invalid declaration content {value!r}")
        return value


class Raw(_Node):
    """A fragment written out verbatim (begin/end halves, entities, verbatim text)."""

    content: str = Field(..., description="Markup emitted as is")


class Slot(_Node):
    ref: SlotRef = Field(..., description="Cell whose binding is spliced here")


class Sequence(_Node):
    items: Tuple[Any, ...] = Field(default=(), description="Terms in document order")

    @field_validator("items", mode="before")
    @classmethod
    def _coerce_items(cls, value: Any) -> Tuple[Any, ...]:
        return as_items(value)


class Sugar(_Node):
    """A specific structure (``image``, ``heading``, ``start_form`` ...) awaiting expansion."""

    name: str = Field(..., description="Constructor name")
    args: Tuple[Any, ...] = Field(default=(), description="Constructor arguments")

    @property
    def arity(self) -> int:
        return len(self.args)


MarkupTerm = Union[Text, Element, Environment, Comment, Declaration, Raw, Slot, Sequence, Sugar]
_TERM_TYPES = (Text, Element, Environment, Comment, Declaration, Raw, Slot, Sequence, Sugar)
CORE_TYPES = (Text, Element, Environment, Comment, Declaration, Raw)


def as_term(value: Any) -> Any:
    """Coerce Python shorthand into a term: str -> text, list -> sequence, SlotRef -> slot."""
    if isinstance(value, _TERM_TYPES):
        return value
    if isinstance(value, str):
        return Text(content=value)
    if isinstance(value, (list, tuple)):
        return Sequence(items=value)
    if isinstance(value, SlotRef):
        return Slot(ref=value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Text(content=str(value))
    raise ValueError(f"not a markup term: {value!r}")


def as_items(value: Any) -> Tuple[Any, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(as_term(v) for v in value)
    return (as_term(value),)


# Builders -------------------------------------------------------------------

def text(content: str) -> Text:
    return Text(content=content)


def el(name: str, attrs: Any = ()) -> Element:
    """An element, written ``name$attrs`` in term notation."""
    return Element(name=name.lower(), attrs=attrs)


def env(name: str, body: Any = (), attrs: Any = ()) -> Environment:
    """An environment, written ``name(attrs, body)`` in term notation."""
    return Environment(name=name.lower(), attrs=attrs, body=body)


def seq(*items: Any) -> Sequence:
    return Sequence(items=items)


def new_slot(name: Optional[str] = None) -> SlotRef:
    return SlotRef(name)


def bind_slot(ref: SlotRef, value: Any) -> None:
    ref.bind(value)


# Normalization --------------------------------------------------------------

def _flatten(node: Any, strict: bool, out: List[Any]) -> None:
    if isinstance(node, Sequence):
        for item in node.items:
            _flatten(item, strict, out)
    elif isinstance(node, Slot):
        if node.ref.bound:
            _flatten(node.ref.binding, strict, out)
        elif strict:
            raise UnboundSlot(node.ref)
        else:
            out.append(node)
    elif isinstance(node, Environment):
        out.append(Environment(name=node.name, attrs=node.attrs, body=_flat_list(node.body, strict)))
    elif isinstance(node, Text):
        if not node.content:
            return
        if out and isinstance(out[-1], Text):
            out[-1] = Text(content=out[-1].content + node.content)
        else:
            out.append(node)
    elif isinstance(node, Sugar):
        if strict:
            raise MalformedSugar(node.name, "must be expanded before it is normalized")
        out.append(node)
    else:
        out.append(node)


def _flat_list(items: Iterable[Any], strict: bool) -> List[Any]:
    out: List[Any] = []
    for item in items:
        _flatten(as_term(item), strict, out)
    return out


def normalize_items(term: Any) -> List[Any]:
    """Flatten a (list of) term(s) into core nodes in document order."""
    return _flat_list(as_items(term), strict=True)


def normalize(term: Any) -> Any:
    """
    Reduce a fully bound term to core nodes.

    Sequences are flattened, bound slots replaced by their bindings, adjacent
    text merged and empty text dropped. A sequence (or list) normalizes to a
    flat Sequence; any other term to the single node it reduces to, or to a
    Sequence when it reduces to zero or several nodes.

    Raises:
        UnboundSlot: a slot reachable from the term has no binding
    """
    items = normalize_items(term)
    if not isinstance(term, (Sequence, list, tuple)) and len(items) == 1:
        return items[0]
    return Sequence(items=items)


def term_equal(a: Any, b: Any) -> bool:
    """Structural equality of normalized forms; unbound slots compare by identity."""
    return _flat_list(as_items(a), strict=False) == _flat_list(as_items(b), strict=False)
