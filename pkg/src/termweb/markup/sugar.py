"""
Specific structures (document and form sugar) and their expansion.

Sugar terms are convenient shorthands (``image``, ``heading``,
``start_form``, ``menu`` ...) that expand into core markup terms. The
built-in table can be extended, and shadowed, with user rules registered
through ``register_expansion``.

This module also bridges markup terms and the functional term notation of
``termweb.terms`` (``markup_to_term`` / ``term_to_markup``), which is how
markup travels through term text and the active-module wire.
"""

import logging
import re
import threading
from decimal import Decimal
from typing import Any, Callable, Dict, List, Optional, Sequence as Seq, Tuple

from pydantic import BaseModel, Field, NonNegativeInt

from termweb.errors import ExpansionDepthExceeded, MalformedSugar, ReservedHead
from termweb.markup.entities import escape_all, escape_attr
from termweb.markup.model import (
    Comment, Declaration, Element, Environment, Flag, Pair, Raw, Sequence, Slot, SlotRef, Sugar, Text,
    as_attrs, as_term,
)
from termweb.settings import Settings, get_settings
from termweb.terms import PLACEHOLDER, Atom, Compound, Placeholder, term_text

logger = logging.getLogger(__name__)

RULE = "--"
LINEBREAK = "\\\\"
PARBREAK = "$"
CGI_REPLY_TEXT = "Content-type: text/html\n\n"
PR_ALT = "Developed using the termweb Web programming library"

# Heads of the core constructors; user rules may not take these names
RESERVED_HEADS = frozenset({
    "text", "element", "environment", "env", "comment", "declaration",
    "declare", "raw", "slot", "sequence",
})

_ENTITY_NAME = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z|#[0-9]+\Z|#[xX][0-9a-fA-F]+\Z")


# Builders --------------------------------------------------------------------

def sugar(name: str, *args: Any) -> Sugar:
    return Sugar(name=name, args=args)


def start() -> Sugar:
    return Sugar(name="start")


def end(name: Optional[str] = None) -> Sugar:
    """``end`` closes a document; ``end(Name)`` closes a ``begin(Name)``."""
    return Sugar(name="end") if name is None else Sugar(name="end", args=(name,))


def begin(name: str, attrs: Any = None) -> Sugar:
    return Sugar(name="begin", args=(name,) if attrs is None else (name, attrs))


def rule() -> Sugar:
    return Sugar(name=RULE)


def linebreak() -> Sugar:
    return Sugar(name=LINEBREAK)


def parbreak() -> Sugar:
    return Sugar(name=PARBREAK)


def comment(content: str) -> Sugar:
    return sugar("comment", content)


def declare(content: str) -> Sugar:
    return sugar("declare", content)


def image(addr: str, attrs: Any = None) -> Sugar:
    return sugar("image", addr) if attrs is None else sugar("image", addr, attrs)


def ref(addr: str, body: Any) -> Sugar:
    return sugar("ref", addr, body)


def label(name: str, body: Any) -> Sugar:
    return sugar("label", name, body)


def heading(level: int, body: Any) -> Sugar:
    return sugar("heading", level, body)


def itemize(items: Any) -> Sugar:
    return sugar("itemize", items)


def enumerate_(items: Any) -> Sugar:
    return sugar("enumerate", items)


def description(defs: Any) -> Sugar:
    return sugar("description", defs)


def nice_itemize(bullet_or_items: Any, items: Any = None) -> Sugar:
    if items is None:
        return sugar("nice_itemize", bullet_or_items)
    return sugar("nice_itemize", bullet_or_items, items)


def preformatted(lines: Any) -> Sugar:
    return sugar("preformatted", lines)


def verbatim(body: Any) -> Sugar:
    return sugar("verbatim", body)


def prolog_term(value: Any) -> Sugar:
    return sugar("prolog_term", value)


def nl() -> Sugar:
    return Sugar(name="nl")


def entity(name: str) -> Sugar:
    return sugar("entity", name)


def cgi_reply() -> Sugar:
    return Sugar(name="cgi_reply")


def pr() -> Sugar:
    return Sugar(name="pr")


def start_form(addr: Optional[str] = None, attrs: Any = None) -> Sugar:
    if addr is None:
        return Sugar(name="start_form")
    return sugar("start_form", addr) if attrs is None else sugar("start_form", addr, attrs)


def end_form() -> Sugar:
    return Sugar(name="end_form")


def checkbox(name: str, state: Any) -> Sugar:
    return sugar("checkbox", name, state)


def radio(name: str, value: str, selected_value: str) -> Sugar:
    return sugar("radio", name, value, selected_value)


def input_(kind: str, attrs: Any = ()) -> Sugar:
    return sugar("input", kind, attrs)


def textinput(name: str, attrs: Any, body: Any) -> Sugar:
    return sugar("textinput", name, attrs, body)


def option(name: str, value: str, options: Seq[str]) -> Sugar:
    return sugar("option", name, value, list(options))


def menu(name: str, attrs: Any, items: Any) -> Sugar:
    return sugar("menu", name, attrs, items)


def selected(item: Any) -> Sugar:
    """Marks a menu item as initially selected."""
    return sugar("selected", item)


# Argument helpers ------------------------------------------------------------

def _plain(s: Sugar, index: int) -> str:
    value = s.args[index]
    if isinstance(value, Atom):
        return value.name
    if isinstance(value, Text):
        return value.content
    if isinstance(value, (str, int, Decimal)) and not isinstance(value, bool):
        return str(value)
    raise MalformedSugar(s.name, f"argument {index + 1} must be plain text, got {value!r}")


def _attrs(s: Sugar, index: int) -> Tuple[Any, ...]:
    try:
        return as_attrs(s.args[index])
    except (ValueError, TypeError) as e:
        raise MalformedSugar(s.name, f"argument {index + 1} is not an attribute list: {e}")


def _markup(s: Sugar, index: int) -> Any:
    try:
        return as_term(s.args[index])
    except ValueError as e:
        raise MalformedSugar(s.name, str(e))


def _items(s: Sugar, index: int) -> List[Any]:
    value = s.args[index]
    if isinstance(value, Sequence):
        return list(value.items)
    if isinstance(value, (list, tuple)):
        return list(value)
    raise MalformedSugar(s.name, f"argument {index + 1} must be a list")


def _open_tag(name: str, attrs: Tuple[Any, ...]) -> str:
    parts = [name]
    for attr in attrs:
        if isinstance(attr, Flag):
            parts.append(attr.name)
        else:
            parts.append(f'{attr.name}="{escape_attr(attr.value)}"')
    return "<" + " ".join(parts) + ">"


def _form_attrs(s: Sugar) -> Tuple[Any, ...]:
    if s.arity == 0:
        return (Pair(name="method", value="POST"),)
    if s.arity == 1:
        return (Pair(name="method", value="POST"), Pair(name="action", value=_plain(s, 0)))
    return (Pair(name="action", value=_plain(s, 0)),) + _attrs(s, 1)


# Built-in table --------------------------------------------------------------

def _heading(s: Sugar, settings: Settings) -> Any:
    level = s.args[0]
    if isinstance(level, str) and level.isdigit():
        level = int(level)
    if not isinstance(level, int) or isinstance(level, bool) or not 1 <= level <= 6:
        raise MalformedSugar("heading", f"level must be between 1 and 6, got {level!r}")
    return Environment(name=f"h{level}", body=_markup(s, 1))


def _list_env(tag: str) -> Callable[[Sugar, Settings], Any]:
    def rewrite(s: Sugar, settings: Settings) -> Any:
        return Environment(name=tag, body=[Environment(name="li", body=item) for item in _items(s, 0)])
    return rewrite


def _description(s: Sugar, settings: Settings) -> Any:
    body = []
    for definition in _items(s, 0):
        parts = list(definition.items) if isinstance(definition, Sequence) else (
            list(definition) if isinstance(definition, (list, tuple)) else [definition])
        if not parts:
            raise MalformedSugar("description", "empty definition")
        body.extend(Environment(name="dt", body=term) for term in parts[:-1])
        body.append(Environment(name="dd", body=parts[-1]))
    return Environment(name="dl", body=body)


def _nice_itemize(s: Sugar, settings: Settings) -> Any:
    bullet = _plain(s, 0) if s.arity == 2 else settings.bullet_image
    items = _items(s, s.arity - 1)
    bullet_img = Element(name="img", attrs=[("src", bullet), ("align", "bottom"), ("alt", "*")])
    return Environment(name="dl", body=[Environment(name="dd", body=[bullet_img, item]) for item in items])


def _preformatted(s: Sugar, settings: Settings) -> Any:
    body: List[Any] = []
    for i, line in enumerate(_items(s, 0)):
        if i:
            body.append(Text(content="\n"))
        body.append(line)
    return Environment(name="pre", body=body)


def _verbatim(s: Sugar, settings: Settings) -> Any:
    value = s.args[0]
    if isinstance(value, Text):
        content = value.content
    elif isinstance(value, str):
        content = value
    else:
        from termweb.markup.codec import render
        content = render(value)
    return Raw(content=escape_all(content))


def _entity(s: Sugar, settings: Settings) -> Any:
    name = _plain(s, 0)
    if not _ENTITY_NAME.match(name):
        raise MalformedSugar("entity", f"bad entity name {name!r}")
    return Raw(content=f"&{name};")


def _pr(s: Sugar, settings: Settings) -> Any:
    logo = Element(name="img", attrs=[("src", settings.pr_logo), ("alt", PR_ALT)])
    return Environment(name="a", attrs=[("href", settings.pr_manual_url)], body=[logo])


def _checked(flag: bool) -> Tuple[Any, ...]:
    return (Flag(name="checked"),) if flag else ()


def _checkbox(s: Sugar, settings: Settings) -> Any:
    state = s.args[1]
    on = state is True or (isinstance(state, (str, Atom)) and _plain(s, 1) == "on")
    attrs = (Pair(name="type", value="checkbox"), Pair(name="name", value=_plain(s, 0))) + _checked(on)
    return Element(name="input", attrs=attrs)


def _radio(s: Sugar, settings: Settings) -> Any:
    value = _plain(s, 1)
    attrs = (Pair(name="type", value="radio"), Pair(name="name", value=_plain(s, 0)),
             Pair(name="value", value=value)) + _checked(_plain(s, 2) == value)
    return Element(name="input", attrs=attrs)


def _textinput(s: Sugar, settings: Settings) -> Any:
    body = s.args[2]
    if isinstance(body, (list, tuple)) and all(isinstance(line, str) for line in body):
        body = "\n".join(body)
    attrs = (Pair(name="name", value=_plain(s, 0)),) + _attrs(s, 1)
    try:
        return Environment(name="textarea", attrs=attrs, body=body)
    except ValueError as e:
        raise MalformedSugar("textinput", str(e))


def _option(s: Sugar, settings: Settings) -> Any:
    current = _plain(s, 1)
    options = [str(o.name if isinstance(o, Atom) else o) for o in _items(s, 2)]
    chosen = current if current in options else (options[0] if options else None)
    body = [Environment(name="option", attrs=_checked_selected(o == chosen), body=o) for o in options]
    return Environment(name="select", attrs=[("name", _plain(s, 0))], body=body)


def _checked_selected(flag: bool) -> Tuple[Any, ...]:
    return (Flag(name="selected"),) if flag else ()


def _menu(s: Sugar, settings: Settings) -> Any:
    body = []
    for item in _items(s, 2):
        is_selected = isinstance(item, Sugar) and item.name == "selected" and item.arity == 1
        content = item.args[0] if is_selected else item
        body.append(Environment(name="option", attrs=_checked_selected(is_selected), body=content))
    attrs = (Pair(name="name", value=_plain(s, 0)),) + _attrs(s, 1)
    return Environment(name="select", attrs=attrs, body=body)


def _selected(s: Sugar, settings: Settings) -> Any:
    raise MalformedSugar("selected", "only valid as an item of menu")


Rewrite = Callable[[Sugar, Settings], Any]

BUILTIN_RULES: Dict[Tuple[str, int], Rewrite] = {
    ("start", 0): lambda s, cfg: Raw(content="<html>"),
    ("end", 0): lambda s, cfg: Raw(content="</html>"),
    (RULE, 0): lambda s, cfg: Element(name="hr"),
    (LINEBREAK, 0): lambda s, cfg: Element(name="br"),
    (PARBREAK, 0): lambda s, cfg: Element(name="p"),
    ("comment", 1): lambda s, cfg: Comment(content=_plain(s, 0)),
    ("declare", 1): lambda s, cfg: Declaration(content=_plain(s, 0)),
    ("image", 1): lambda s, cfg: Element(name="img", attrs=[("src", _plain(s, 0))]),
    ("image", 2): lambda s, cfg: Element(name="img", attrs=(Pair(name="src", value=_plain(s, 0)),) + _attrs(s, 1)),
    ("ref", 2): lambda s, cfg: Environment(name="a", attrs=[("href", _plain(s, 0))], body=_markup(s, 1)),
    ("label", 2): lambda s, cfg: Environment(name="a", attrs=[("name", _plain(s, 0))], body=_markup(s, 1)),
    ("heading", 2): _heading,
    ("itemize", 1): _list_env("ul"),
    ("enumerate", 1): _list_env("ol"),
    ("description", 1): _description,
    ("nice_itemize", 1): _nice_itemize,
    ("nice_itemize", 2): _nice_itemize,
    ("preformatted", 1): _preformatted,
    ("verbatim", 1): _verbatim,
    ("prolog_term", 1): lambda s, cfg: Text(content=prolog_term_text(s.args[0])),
    ("nl", 0): lambda s, cfg: Text(content="\n"),
    ("entity", 1): _entity,
    ("cgi_reply", 0): lambda s, cfg: Text(content=CGI_REPLY_TEXT),
    ("pr", 0): _pr,
    ("begin", 1): lambda s, cfg: Raw(content=_open_tag(_plain(s, 0).lower(), ())),
    ("begin", 2): lambda s, cfg: Raw(content=_open_tag(_plain(s, 0).lower(), _attrs(s, 1))),
    ("end", 1): lambda s, cfg: Raw(content=f"</{_plain(s, 0).lower()}>"),
    ("start_form", 0): lambda s, cfg: Raw(content=_open_tag("form", _form_attrs(s))),
    ("start_form", 1): lambda s, cfg: Raw(content=_open_tag("form", _form_attrs(s))),
    ("start_form", 2): lambda s, cfg: Raw(content=_open_tag("form", _form_attrs(s))),
    ("end_form", 0): lambda s, cfg: Raw(content="</form>"),
    ("checkbox", 2): _checkbox,
    ("radio", 3): _radio,
    ("input", 2): lambda s, cfg: Element(name="input", attrs=(Pair(name="type", value=_plain(s, 0)),) + _attrs(s, 1)),
    ("textinput", 3): _textinput,
    ("option", 3): _option,
    ("menu", 3): _menu,
    ("selected", 1): _selected,
}

# Openers that swallow their siblings up to the matching closer
_GROUPS = {
    "start": ("end", lambda s: ("html", ())),
    "start_form": ("end_form", lambda s: ("form", _form_attrs(s))),
}


class ExpansionRule(BaseModel):
    """A user-defined structure: ``name/arity`` rewritten by ``rewrite``."""

    name: str = Field(..., description="Constructor name")
    arity: NonNegativeInt = Field(..., description="Number of arguments")
    rewrite: Callable[[Sugar], Any] = Field(..., description="Maps the sugar term to markup or further sugar")

    @property
    def head(self) -> Tuple[str, int]:
        return (self.name, self.arity)


class ExpansionRegistry:
    """
    Built-in sugar table plus user rules.

    User rules shadow built-ins with the same head and the last registration
    wins. Registration and lookup are safe to interleave from many threads.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self._settings = settings
        self._user: Dict[Tuple[str, int], ExpansionRule] = {}
        self._lock = threading.RLock()

    @property
    def settings(self) -> Settings:
        return self._settings or get_settings()

    def register(self, rule: ExpansionRule) -> None:
        if rule.name in RESERVED_HEADS:
            raise ReservedHead(rule.name)
        with self._lock:
            if rule.head in self._user:
                logger.debug("replacing expansion rule %s/%d", rule.name, rule.arity)
            self._user[rule.head] = rule

    def unregister(self, name: str, arity: int) -> None:
        with self._lock:
            self._user.pop((name, arity), None)

    def knows(self, name: str, arity: int) -> bool:
        with self._lock:
            return (name, arity) in self._user or (name, arity) in BUILTIN_RULES

    def _user_rule(self, name: str, arity: int) -> Optional[ExpansionRule]:
        with self._lock:
            return self._user.get((name, arity))

    def _apply(self, s: Sugar) -> Any:
        user = self._user_rule(s.name, s.arity)
        if user is not None:
            return user.rewrite(s)
        builtin = BUILTIN_RULES.get((s.name, s.arity))
        if builtin is None:
            raise MalformedSugar(s.name, f"no structure {s.name}/{s.arity}")
        return builtin(s, self.settings)

    def expand(self, term: Any, depth: int = 0) -> Any:
        """
        Rewrite every sugar constructor in ``term`` into core markup.

        Raises:
            ExpansionDepthExceeded: rewrites of one term chained past the limit
            MalformedSugar: a constructor got arguments of the wrong shape
        """
        try:
            term = as_term(term)
        except ValueError as e:
            raise MalformedSugar(type(term).__name__, str(e))
        if isinstance(term, Sequence):
            return Sequence(items=self._expand_items(term.items, depth))
        if isinstance(term, Environment):
            return Environment(name=term.name, attrs=term.attrs, body=self._expand_items(term.body, depth))
        if isinstance(term, Slot):
            return self.expand(term.ref.binding, depth) if term.ref.bound else term
        if isinstance(term, Sugar):
            limit = self.settings.expansion_depth
            if depth >= limit:
                raise ExpansionDepthExceeded(term.name, limit)
            try:
                rewritten = self._apply(term)
            except IndexError:
                raise MalformedSugar(term.name, "missing argument")
            return self.expand(rewritten, depth + 1)
        return term

    def _closer_for(self, item: Any) -> Optional[str]:
        if not isinstance(item, Sugar) or item.name not in _GROUPS:
            return None
        if item.arity not in ((0,) if item.name == "start" else (0, 1, 2)):
            return None
        closer = _GROUPS[item.name][0]
        # A user rule for either half disables grouping
        if self._user_rule(item.name, item.arity) or self._user_rule(closer, 0):
            return None
        return closer

    def _expand_items(self, items: Seq[Any], depth: int) -> List[Any]:
        out: List[Any] = []
        i = 0
        while i < len(items):
            item = items[i]
            closer = self._closer_for(item)
            if closer is not None:
                j = _matching_close(items, i, item.name, closer)
                if j is not None:
                    name, attrs = _GROUPS[item.name][1](item)
                    body = self._expand_items(items[i + 1:j], depth)
                    out.append(Environment(name=name, attrs=attrs, body=body))
                    i = j + 1
                    continue
            out.append(self.expand(item, depth))
            i += 1
        return out


def _is_sugar(item: Any, name: str, arities: Tuple[int, ...]) -> bool:
    return isinstance(item, Sugar) and item.name == name and item.arity in arities


def _matching_close(items: Seq[Any], i: int, opener: str, closer: str) -> Optional[int]:
    open_arities = (0,) if opener == "start" else (0, 1, 2)
    level = 0
    for j in range(i + 1, len(items)):
        if _is_sugar(items[j], opener, open_arities):
            level += 1
        elif _is_sugar(items[j], closer, (0,)):
            if level == 0:
                return j
            level -= 1
    return None


_default_registry = ExpansionRegistry()


def default_registry() -> ExpansionRegistry:
    return _default_registry


def register_expansion(rule_or_name: Any, arity: Optional[int] = None,
                       rewrite: Optional[Callable[[Sugar], Any]] = None,
                       registry: Optional[ExpansionRegistry] = None) -> ExpansionRule:
    """
    Add a structure to the expansion table.

    Accepts either an ExpansionRule or ``name, arity, rewrite``.

    Raises:
        ReservedHead: name is one of the core markup constructors
    """
    if isinstance(rule_or_name, ExpansionRule):
        new_rule = rule_or_name
    else:
        new_rule = ExpansionRule(name=rule_or_name, arity=arity, rewrite=rewrite)
    (registry or _default_registry).register(new_rule)
    return new_rule


def expand(term: Any, registry: Optional[ExpansionRegistry] = None) -> Any:
    return (registry or _default_registry).expand(term)


# Functional notation ---------------------------------------------------------

def prolog_term_text(value: Any) -> str:
    """Write a structured value in functional notation; unknowns print as ``_``."""
    if isinstance(value, SlotRef):
        return prolog_term_text(markup_to_term(value.binding)) if value.bound else "_"
    if value is None:
        return "_"
    return term_text(value)


def _attr_to_term(attr: Any) -> Any:
    if isinstance(attr, Flag):
        return Atom(attr.name)
    return Compound("=", [Atom(attr.name), attr.value])


def markup_to_term(term: Any) -> Any:
    """
    Write core markup in term notation.

    element -> ``'$'(name,[atts])``, environment -> ``env(name,[atts],[body])``,
    comment -> ``comment(s)``, declaration -> ``declare(s)``, text -> string,
    sequence -> list. Unbound slots become placeholders.
    """
    term = as_term(term)
    if isinstance(term, Text):
        return term.content
    if isinstance(term, Element):
        return Compound("$", [Atom(term.name), [_attr_to_term(a) for a in term.attrs]])
    if isinstance(term, Environment):
        return Compound("env", [Atom(term.name), [_attr_to_term(a) for a in term.attrs],
                                [markup_to_term(b) for b in term.body]])
    if isinstance(term, Comment):
        return Compound("comment", [term.content])
    if isinstance(term, Declaration):
        return Compound("declare", [term.content])
    if isinstance(term, Raw):
        return Compound("raw", [term.content])
    if isinstance(term, Sequence):
        return [markup_to_term(item) for item in term.items]
    if isinstance(term, Slot):
        return markup_to_term(term.ref.binding) if term.ref.bound else PLACEHOLDER
    raise MalformedSugar(term.name, "expand sugar before writing it as a term")


# Argument positions that hold attribute lists or plain values, per head
_ATTR_ARGS = {("image", 2): 1, ("start_form", 2): 1, ("input", 2): 1, ("textinput", 3): 1,
              ("menu", 3): 1, ("begin", 2): 1}
_PLAIN_ARGS = {
    ("comment", 1): {0}, ("declare", 1): {0}, ("image", 1): {0}, ("image", 2): {0},
    ("ref", 2): {0}, ("label", 2): {0}, ("heading", 2): {0}, ("nice_itemize", 2): {0},
    ("entity", 1): {0}, ("begin", 1): {0}, ("begin", 2): {0}, ("end", 1): {0},
    ("start_form", 1): {0}, ("start_form", 2): {0}, ("checkbox", 2): {0, 1},
    ("radio", 3): {0, 1, 2}, ("input", 2): {0}, ("textinput", 3): {0},
    ("option", 3): {0, 1, 2}, ("menu", 3): {0},
}


def _plain_value(value: Any) -> Any:
    if isinstance(value, Atom):
        return value.name
    if isinstance(value, list):
        return [_plain_value(v) for v in value]
    return value


def _term_attrs(value: Any) -> Tuple[Any, ...]:
    if not isinstance(value, list):
        raise MalformedSugar("attributes", f"expected a list, got {term_text(value)}")
    attrs = []
    for item in value:
        if isinstance(item, Atom):
            attrs.append(Flag(name=item.name))
        elif isinstance(item, Compound) and item.functor == "=" and item.arity == 2:
            attrs.append(Pair(name=str(_plain_value(item.args[0])), value=str(_plain_value(item.args[1]))))
        else:
            raise MalformedSugar("attributes", f"not an attribute: {term_text(item)}")
    return tuple(attrs)


def term_to_markup(value: Any, registry: Optional[ExpansionRegistry] = None) -> Any:
    """
    Read markup written in term notation.

    Besides the forms produced by ``markup_to_term`` this accepts every sugar
    constructor by name and arity, atom sugar (``start``, ``'--'``, ``'$'``
    ...), ``name(Body)`` and ``name(Atts, Body)`` environments and
    ``'$'(Item)`` menu selections. Atoms that name no structure are text.
    """
    registry = registry or _default_registry
    if isinstance(value, str):
        return Text(content=value)
    if isinstance(value, (int, float, Decimal)) and not isinstance(value, bool):
        return Text(content=term_text(value))
    if isinstance(value, list):
        return Sequence(items=[term_to_markup(v, registry) for v in value])
    if isinstance(value, Placeholder):
        return Slot(ref=SlotRef())
    if isinstance(value, Atom):
        if registry.knows(value.name, 0):
            return Sugar(name=value.name)
        return Text(content=value.name)
    if not isinstance(value, Compound):
        raise MalformedSugar(type(value).__name__, "not a markup term")

    head = (value.functor, value.arity)
    args = list(value.args)
    if head == ("env", 3):
        return Environment(name=str(_plain_value(args[0])), attrs=_term_attrs(args[1]),
                           body=term_to_markup(args[2], registry))
    if head == ("$", 2):
        return Element(name=str(_plain_value(args[0])), attrs=_term_attrs(args[1]))
    if head == ("$", 1):
        return Sugar(name="selected", args=(term_to_markup(args[0], registry),))
    if head == ("comment", 1):
        return Comment(content=str(_plain_value(args[0])))
    if head == ("declare", 1):
        return Declaration(content=str(_plain_value(args[0])))
    if head == ("raw", 1):
        return Raw(content=str(_plain_value(args[0])))
    if head == ("prolog_term", 1):
        return Sugar(name="prolog_term", args=(args[0],))
    if registry.knows(*head):
        plain = _PLAIN_ARGS.get(head, set())
        converted = []
        for i, arg in enumerate(args):
            if _ATTR_ARGS.get(head) == i:
                converted.append(_term_attrs(arg))
            elif i in plain:
                converted.append(_plain_value(arg))
            elif isinstance(arg, list):
                converted.append([term_to_markup(a, registry) for a in arg])
            else:
                converted.append(term_to_markup(arg, registry))
        return Sugar(name=value.functor, args=tuple(converted))
    if value.arity == 1:
        return Environment(name=value.functor.lower(), body=term_to_markup(args[0], registry))
    if value.arity == 2:
        return Environment(name=value.functor.lower(), attrs=_term_attrs(args[0]),
                           body=term_to_markup(args[1], registry))
    raise MalformedSugar(value.functor, f"no structure {value.functor}/{value.arity}")
