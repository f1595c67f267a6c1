"""
HTML templates with ``<V>name</V>`` slots.

A template is parsed like any HTML document, except that each closed
``<V>name</V>`` environment becomes a slot. Slots with the same name share
one SlotRef, so filling a name fills every occurrence.
"""

import logging
import re
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from termweb.errors import AlreadyBound, UnknownName
from termweb.markup.codec import Dialect, parse_with_builder
from termweb.markup.model import Environment, Slot, SlotRef, Text, as_term

logger = logging.getLogger(__name__)

_SLOT_NAME = re.compile(r"\S+\Z")


class TemplateDict:
    """Ordered name -> SlotRef map, in first-occurrence order."""

    def __init__(self):
        self._slots: Dict[str, SlotRef] = {}

    def slot(self, name: str) -> SlotRef:
        if name not in self._slots:
            self._slots[name] = SlotRef(name)
        return self._slots[name]

    def names(self) -> List[str]:
        return list(self._slots)

    def items(self) -> List[Tuple[str, SlotRef]]:
        return list(self._slots.items())

    def __getitem__(self, name: str) -> SlotRef:
        try:
            return self._slots[name]
        except KeyError:
            raise UnknownName(name)

    def __contains__(self, name: object) -> bool:
        return name in self._slots

    def __iter__(self) -> Iterator[str]:
        return iter(self._slots)

    def __len__(self) -> int:
        return len(self._slots)

    def __repr__(self) -> str:
        return f"TemplateDict({self.names()!r})"


def _slot_name(node: Environment) -> Optional[str]:
    if node.name.lower() != "v" or len(node.body) != 1 or not isinstance(node.body[0], Text):
        return None
    name = node.body[0].content.strip()
    return name if _SLOT_NAME.match(name) else None


def _substitute(items: Iterable[Any], implicit: set, slots: TemplateDict) -> List[Any]:
    out = []
    for node in items:
        if isinstance(node, Environment):
            name = _slot_name(node)
            if name is not None and id(node) not in implicit:
                out.append(Slot(ref=slots.slot(name)))
                continue
            if name is not None:
                logger.warning("<V>%s has no closing tag; kept as an ordinary environment", name)
            node = Environment(name=node.name, attrs=node.attrs, body=_substitute(node.body, implicit, slots))
        out.append(node)
    return out


def parse_template(data: Union[str, bytes]) -> Tuple[List[Any], TemplateDict]:
    """
    Parse an HTML template.

    Returns:
        (terms, dict): the document with ``<V>name</V>`` replaced by slots,
        and the dictionary of those slots
    """
    builder = parse_with_builder(data, Dialect.HTML)
    slots = TemplateDict()
    terms = _substitute(builder.top, builder.implicit, slots)
    return terms, slots


def fill(slots: TemplateDict, bindings: Union[Mapping[str, Any], Iterable[Tuple[str, Any]]]) -> None:
    """
    Bind template slots by name.

    Every name is checked before anything is bound, so an unknown name or a
    slot that is already filled leaves the template untouched.

    Raises:
        UnknownName: a binding names no slot of the template
        AlreadyBound: the slot was filled before, or is named twice
    """
    pairs = list(bindings.items()) if isinstance(bindings, Mapping) else list(bindings)
    seen = set()
    for name, _ in pairs:
        if name not in slots:
            raise UnknownName(name)
        if slots[name].bound or name in seen:
            raise AlreadyBound(slots[name])
        seen.add(name)
    for name, value in pairs:
        slots[name].bind(as_term(value))


def file_to_string(path: Union[str, Path]) -> str:
    """Read a whole file as text, byte for byte (Latin-1)."""
    return Path(path).read_bytes().decode("latin-1")


html_template = parse_template
