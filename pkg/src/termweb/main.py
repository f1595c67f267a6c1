#!/usr/bin/env python
"""
Command-line entry points for termweb.

    termweb fetch URL [--head] [--timeout N] [--if-modified-since DATE] [--user-agent S] [--out FILE]
    termweb check-links URL [--timeout N] [--workers N]
    termweb parse FILE [--xml]
    termweb render FILE [--xml]
    termweb template --template FILE [--bind NAME=FILE]... [--bind-text NAME=TEXT]...
    termweb phone-db [--backend file:DIR|nameserver:HOST:PORT|addr:HOST:PORT]
    termweb actmod serve|call|nameserver ...

Exit codes: 0 success, 1 negative answer (non-success status, bad links,
failed call), 2 error.
"""

import argparse
import logging
import signal
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence

from termweb.actmod.discovery import discovery_from_spec, run_nameserver
from termweb.actmod.phone_db import MODULE_NAME as PHONE_DB, make_registry
from termweb.actmod.server import ActiveModule, call_remote, serve
from termweb.actmod.wire import GoalCall, ModuleAddress, RemoteError, Success, outcome_term
from termweb.apps.check_links import check_links
from termweb.apps.phone_db_cgi import run_cgi
from termweb.errors import TermSyntax, TermwebError, UnknownName
from termweb.logs import setup_logging
from termweb.markup.codec import Dialect, parse, render_to_stream
from termweb.markup.model import Text
from termweb.markup.sugar import markup_to_term, term_to_markup
from termweb.markup.template import file_to_string, fill, parse_template
from termweb.settings import Settings, load_settings
from termweb.terms import parse_term_text, term_text
from termweb.web.http_client import (
    Allow, Authenticate, Content, ContentType, GenericField, Head, HttpDate, IfModifiedSince, RequestTimeout,
    Status, StatusClass, UserAgent, fetch_url, format_http_date, parse_http_date, response_param,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2

# Active modules the CLI knows how to serve
MODULES = {PHONE_DB: make_registry}


def _fail(error: BaseException, context: Optional[str] = None) -> int:
    where = f"{context}: " if context else ""
    print(f"❌ {type(error).__name__}: {where}{error}", file=sys.stderr)
    return EXIT_ERROR


def _read_input(path: str) -> bytes:
    return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()


def _stdout() -> Any:
    return sys.stdout.buffer


# fetch -----------------------------------------------------------------------

def param_line(param: Any) -> str:
    """One response parameter as ``name: value``."""
    if isinstance(param, GenericField):
        return f"{param.name}: {param.value}"
    if isinstance(param, Status):
        return f"status: {param.code} {param.phrase}".rstrip()
    if isinstance(param, ContentType):
        params = "".join(f"; {k}={v}" for k, v in param.params)
        return f"content_type: {param.type}/{param.subtype}{params}"
    if isinstance(param, Allow):
        return f"allow: {', '.join(param.methods)}"
    if isinstance(param, Authenticate):
        return "authenticate: " + ", ".join(f"{scheme} {params}".rstrip() for scheme, params in param.challenges)
    values = list(param.model_dump().values())
    value = values[0] if len(values) == 1 else " ".join(map(str, values))
    if isinstance(getattr(param, "date", None), HttpDate):
        value = format_http_date(param.date)
    return f"{param.kind}: {value}"


def cmd_fetch(args: argparse.Namespace, settings: Settings) -> int:
    options: List[Any] = []
    if args.head:
        options.append(Head())
    if args.timeout:
        options.append(RequestTimeout(seconds=args.timeout))
    if args.if_modified_since:
        options.append(IfModifiedSince(date=parse_http_date(args.if_modified_since)))
    if args.user_agent:
        options.append(UserAgent(name=args.user_agent))

    params = fetch_url(args.url, options, settings)
    content = response_param(params, Content)
    if content is None or args.out:
        for param in params:
            if not isinstance(param, Content):
                print(param_line(param))
    if content is not None:
        if args.out:
            Path(args.out).write_bytes(content.data)
        else:
            out = _stdout()
            out.write(content.data)
            out.flush()
    status = response_param(params, Status)
    return EXIT_OK if status.status_class is StatusClass.SUCCESS else EXIT_NEGATIVE


# check-links -----------------------------------------------------------------

def cmd_check_links(args: argparse.Namespace, settings: Settings) -> int:
    bad = check_links(args.url, args.timeout, args.workers, settings)
    for link in bad:
        print(link)
    return EXIT_NEGATIVE if bad else EXIT_OK


# parse / render / template ---------------------------------------------------

def _dialect(args: argparse.Namespace) -> Dialect:
    return Dialect.XML if args.xml else Dialect.HTML


def cmd_parse(args: argparse.Namespace, settings: Settings) -> int:
    try:
        terms = parse(_read_input(args.file), _dialect(args))
    except TermwebError as e:
        return _fail(e, args.file)
    print(term_text(markup_to_term(terms)))
    return EXIT_OK


def cmd_render(args: argparse.Namespace, settings: Settings) -> int:
    try:
        value = parse_term_text(_read_input(args.file).decode("utf-8"))
        markup = term_to_markup(value)
    except TermwebError as e:
        return _fail(e, args.file)
    render_to_stream(markup, _stdout(), _dialect(args))
    return EXIT_OK


def _binding(spec: str, option: str) -> List[str]:
    name, eq, value = spec.partition("=")
    if not eq or not name:
        raise argparse.ArgumentTypeError(f"{option} expects NAME=VALUE, got {spec!r}")
    return [name, value]


def cmd_template(args: argparse.Namespace, settings: Settings) -> int:
    terms, slots = parse_template(file_to_string(args.template))
    # Names are checked before any --bind file (or stdin) is read
    for name, _ in args.bind + args.bind_text:
        if name not in slots:
            raise UnknownName(name)
    bindings = [(name, parse(_read_input(path))) for name, path in args.bind]
    bindings += [(name, Text(content=value)) for name, value in args.bind_text]
    fill(slots, bindings)
    render_to_stream(terms, _stdout())
    return EXIT_OK


# phone-db --------------------------------------------------------------------

def cmd_phone_db(args: argparse.Namespace, settings: Settings) -> int:
    spec = args.backend or settings.phone_db_backend
    backend = discovery_from_spec(spec, settings) if spec else None
    return run_cgi(backend=backend, settings=settings)


# actmod ----------------------------------------------------------------------

def _serve_forever(module: ActiveModule) -> None:
    def stop(signum: int, frame: Any) -> None:
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, stop)
    print(f"{module.registry.name} listening on {module.address}", flush=True)
    try:
        while module.running:
            module.wait(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        module.shutdown()


def cmd_actmod_serve(args: argparse.Namespace, settings: Settings) -> int:
    publisher = discovery_from_spec(args.publish, settings) if args.publish else None
    module = serve(MODULES[args.module](), publisher, args.host, args.port, settings)
    _serve_forever(module)
    return EXIT_OK


def cmd_actmod_nameserver(args: argparse.Namespace, settings: Settings) -> int:
    _serve_forever(run_nameserver(args.host, args.port, settings))
    return EXIT_OK


def _call_arg(text: str) -> Any:
    try:
        return parse_term_text(text)
    except TermSyntax:
        return text


def _locate(locator: Any, module: str) -> ModuleAddress:
    return locator(module) if callable(locator) else locator.locate(module)


def cmd_actmod_call(args: argparse.Namespace, settings: Settings) -> int:
    address = _locate(discovery_from_spec(args.locate, settings), args.module)
    call = GoalCall(operation=args.operation, args=tuple(_call_arg(a) for a in args.args))
    outcome = call_remote(address, call, args.timeout, settings)
    print(term_text(outcome_term(outcome)))
    if isinstance(outcome, Success):
        return EXIT_OK
    if isinstance(outcome, RemoteError):
        print(f"❌ RemoteError: {outcome.message}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_NEGATIVE


# Parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="termweb", description="Web programming with markup as terms")
    parser.add_argument("--verbose", "-v", action="store_true", help="log debug messages to standard error")
    parser.add_argument("--log-file", help="also append log messages to this file")
    parser.add_argument("--config", type=Path, help="YAML file overriding the default settings")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("fetch", help="fetch a URL and print the response")
    p.add_argument("url")
    p.add_argument("--head", action="store_true", help="send HEAD and print only the header")
    p.add_argument("--timeout", type=int, help="seconds to wait for the answer")
    p.add_argument("--if-modified-since", metavar="DATE", help="HTTP date")
    p.add_argument("--user-agent")
    p.add_argument("--out", help="write the body to this file instead of standard output")
    p.set_defaults(handler=cmd_fetch)

    p = commands.add_parser("check-links", help="report links of a page that fail")
    p.add_argument("url")
    p.add_argument("--timeout", type=int, help="seconds per probe")
    p.add_argument("--workers", type=int, help="probes run in parallel")
    p.set_defaults(handler=cmd_check_links)

    p = commands.add_parser("parse", help="print an HTML or XML file as term text")
    p.add_argument("file", help="file to parse, - for standard input")
    p.add_argument("--xml", action="store_true")
    p.set_defaults(handler=cmd_parse)

    p = commands.add_parser("render", help="print term text as HTML or XML")
    p.add_argument("file", help="file holding one term, - for standard input")
    p.add_argument("--xml", action="store_true")
    p.set_defaults(handler=cmd_render)

    p = commands.add_parser("template", help="fill the <V>name</V> slots of a template")
    p.add_argument("--template", required=True)
    p.add_argument("--bind", action="append", default=[], metavar="NAME=FILE",
                   type=lambda s: _binding(s, "--bind"), help="bind a slot to the parsed contents of FILE")
    p.add_argument("--bind-text", action="append", default=[], metavar="NAME=TEXT",
                   type=lambda s: _binding(s, "--bind-text"), help="bind a slot to literal text")
    p.set_defaults(handler=cmd_template)

    p = commands.add_parser("phone-db", help="answer one telephone database CGI request")
    p.add_argument("--backend", help="locate the phone_db active module: file:DIR, nameserver[:HOST:PORT], "
                                     "web:URL or addr:HOST:PORT; default looks up in-process")
    p.set_defaults(handler=cmd_phone_db)

    actmod = commands.add_parser("actmod", help="active modules").add_subparsers(dest="action", required=True)

    p = actmod.add_parser("serve", help="serve an active module until interrupted")
    p.add_argument("--module", choices=sorted(MODULES), default=PHONE_DB)
    p.add_argument("--publish", help="file:DIR, nameserver[:HOST:PORT] or web:URL,DIR")
    p.add_argument("--host", help="interface to listen on")
    p.add_argument("--port", type=int, default=0)
    p.set_defaults(handler=cmd_actmod_serve)

    p = actmod.add_parser("call", help="call an operation of an active module")
    p.add_argument("--module", required=True)
    p.add_argument("--locate", required=True, help="file:DIR, nameserver[:HOST:PORT], web:URL or addr:HOST:PORT")
    p.add_argument("--timeout", type=float)
    p.add_argument("operation")
    p.add_argument("args", nargs="*", help="arguments in term text; _ is an output")
    p.set_defaults(handler=cmd_actmod_call)

    p = actmod.add_parser("nameserver", help="run the name server")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(handler=cmd_actmod_nameserver)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config)
    except (OSError, ValueError) as e:
        return _fail(e)
    setup_logging("DEBUG" if args.verbose else settings.log_level, args.log_file)
    try:
        return args.handler(args, settings)
    except TermwebError as e:
        logger.debug("command failed", exc_info=True)
        return _fail(e)
    except (OSError, ValueError) as e:
        return _fail(e)


def run() -> None:
    sys.exit(main())


def phone_db_cgi() -> None:
    """CGI executable; TERMWEB_PHONE_DB_BACKEND selects an active-module backend."""
    settings = load_settings()
    spec = settings.phone_db_backend
    sys.exit(run_cgi(backend=discovery_from_spec(spec, settings) if spec else None, settings=settings))


if __name__ == "__main__":
    run()
