"""
The telephone database as an active module.

Exports ``response(Name, Response)``, which binds Response to a markup term
(in term notation) answering the query, and ``add_phone(Name, Phone)``,
which records a new number.
"""

import logging
import threading
from typing import Any, Dict, List, Mapping, Optional

from termweb.actmod.server import Registry
from termweb.terms import Atom, Compound, term_text

logger = logging.getLogger(__name__)

MODULE_NAME = "phone_db"

DEFAULT_PHONES: Dict[str, str] = {
    "daniel": "336-7448",
    "manuel": "336-7435",
    "sacha": "543-5316",
}

NO_NAME = "You have to provide a name."


def _text(value: Any) -> str:
    if isinstance(value, Atom):
        return value.name
    if isinstance(value, str):
        return value
    return term_text(value)


def response_term(name: str, phone: Optional[str]) -> List[Any]:
    """The answer for ``name``, as markup in term notation."""
    if phone is None:
        return ["No telephone number available for ", Compound("b", [name]), "."]
    return ["Telephone number of ", Compound("b", [name]), ": ", phone]


class PhoneBook:
    """Name to number table."""

    def __init__(self, phones: Optional[Mapping[str, str]] = None):
        self._phones = dict(DEFAULT_PHONES if phones is None else phones)
        self._lock = threading.Lock()

    def lookup(self, name: str) -> Optional[str]:
        with self._lock:
            return self._phones.get(name)

    def add(self, name: str, phone: str) -> None:
        with self._lock:
            self._phones[name] = phone

    def response(self, name: str) -> Any:
        if not name.strip():
            return NO_NAME
        return response_term(name, self.lookup(name))


def make_registry(phones: Optional[Mapping[str, str]] = None) -> Registry:
    book = PhoneBook(phones)
    registry = Registry(MODULE_NAME)

    @registry.export("response", 2)
    def response(name: Any, _response: Any) -> Any:
        return (name, book.response(_text(name)))

    @registry.export("add_phone", 2, mutating=True)
    def add_phone(name: Any, phone: Any) -> Any:
        book.add(_text(name), _text(phone))
        logger.info("added phone for %s", _text(name))
        return True

    return registry
