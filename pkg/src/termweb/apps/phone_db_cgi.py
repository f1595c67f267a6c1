"""
Telephone database CGI program.

One program both produces the form and handles it: every invocation
answers the submitted name (if any) and then shows the form again. Lookups
run in-process by default, or against the phone_db active module when a
backend locator is given.
"""

import logging
import sys
from typing import IO, Any, List, Optional

from termweb.actmod.phone_db import MODULE_NAME, make_registry
from termweb.actmod.server import Registry, import_stub
from termweb.actmod.wire import CallOutcome, GoalCall, RemoteError, Success
from termweb.errors import ActmodError, TermwebError
from termweb.markup.codec import render_to_stream
from termweb.markup.model import env
from termweb.markup.sugar import (
    cgi_reply, end, end_form, heading, image, input_, linebreak, parbreak, rule, start, start_form,
    term_to_markup,
)
from termweb.settings import Settings
from termweb.terms import PLACEHOLDER
from termweb.web.forms import CgiEnv, form_empty_value, form_value_text, get_form_input, get_form_value

logger = logging.getLogger(__name__)

PAGE_TITLE = "Telephone database"
PROMPT = "Click here, enter name of clip member, and press Return:"
FIELD = "person_name"


def _response_markup(outcome: CallOutcome) -> Any:
    if isinstance(outcome, Success):
        return term_to_markup(outcome.bindings[1])
    if isinstance(outcome, RemoteError):
        raise ActmodError(f"{MODULE_NAME}: {outcome.message}")
    raise ActmodError(f"{MODULE_NAME}: response/2 failed")


def lookup_response(name: str, backend: Any = None, registry: Optional[Registry] = None,
                    settings: Optional[Settings] = None) -> Any:
    """
    Markup answering a query for ``name``.

    Args:
        name: Name typed by the user
        backend: Locator of the phone_db active module; None looks up in-process
        registry: In-process registry to use instead of a fresh one
    """
    if backend is None:
        outcome = (registry or make_registry()).invoke(GoalCall(operation="response", args=(name, PLACEHOLDER)))
    else:
        stub = import_stub(MODULE_NAME, [("response", 2)], backend, settings)
        outcome = stub.response(name, PLACEHOLDER)
    return _response_markup(outcome)


def phone_page(response: Any) -> List[Any]:
    return [
        cgi_reply(),
        start(),
        env("title", PAGE_TITLE),
        image("phone.gif"),
        heading(2, PAGE_TITLE),
        rule(),
        response,
        start_form(),
        PROMPT,
        linebreak(),
        input_("text", [("name", FIELD), ("size", 20)]),
        end_form(),
        end(),
    ]


def handle(cgi_env: CgiEnv, backend: Any = None, registry: Optional[Registry] = None,
           settings: Optional[Settings] = None) -> List[Any]:
    """Decode the request and build the reply page."""
    value = get_form_value(get_form_input(cgi_env), FIELD)
    if form_empty_value(value):
        response: List[Any] = []
    else:
        name = form_value_text(value)
        logger.info("query for %r", name)
        response = [lookup_response(name, backend, registry, settings), parbreak()]
    return phone_page(response)


def error_page(error: Exception) -> List[Any]:
    return [cgi_reply(), start(), env("title", PAGE_TITLE), heading(2, PAGE_TITLE), rule(),
            f"{type(error).__name__}: {error}", end()]


def run_cgi(cgi_env: Optional[CgiEnv] = None, out: Optional[IO] = None, backend: Any = None,
            settings: Optional[Settings] = None) -> int:
    """
    Answer one CGI request on ``out`` (standard output by default).

    Returns:
        0 when the page was produced, 1 when an error page was sent instead
    """
    out = out if out is not None else sys.stdout.buffer
    try:
        page = handle(cgi_env if cgi_env is not None else CgiEnv.from_environ(), backend, settings=settings)
        status = 0
    except TermwebError as e:
        logger.error("phone_db request failed: %s", e)
        page = error_page(e)
        status = 1
    render_to_stream(page, out)
    return status
