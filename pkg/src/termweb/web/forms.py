"""
CGI form input.

Decodes the input of a form handler (GET query strings, urlencoded POST
bodies and multipart/form-data uploads) into a FormDict of typed values:
empty, number, token or lines. Also provides the usual helpers around it
(defaults, emptiness, the handler's own URL, building query strings).
"""

import io
import logging
import os
import re
import sys
from decimal import Decimal
from enum import Enum
from typing import Any, BinaryIO, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union
from urllib.parse import quote_plus

from pydantic import BaseModel, ConfigDict, Field

from termweb.errors import MalformedInput, MissingEnv, Unencodable, UnknownMethod

logger = logging.getLogger(__name__)

_NUMERAL = re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)\Z")
_HEX = "0123456789abcdefABCDEF"
_WHITESPACE = " \t\r\n"

URLENCODED_TYPES = ("application/x-www-form-urlencoded", "application/x-url-encoded")
MULTIPART_TYPE = "multipart/form-data"


# Values ----------------------------------------------------------------------

class _Value(BaseModel):
    model_config = ConfigDict(frozen=True)


class EmptyValue(_Value):
    """The value of an empty (or missing) field."""

    def __repr__(self) -> str:
        return "EMPTY"


class Number(_Value):
    value: Union[int, Decimal] = Field(..., description="Integer, or Decimal when the numeral has a point")


class Token(_Value):
    text: str = Field(..., description="Single-line text value")


class Lines(_Value):
    lines: Tuple[str, ...] = Field(..., description="Value of a text area or file, one entry per line")


FormValue = Union[EmptyValue, Number, Token, Lines]
EMPTY = EmptyValue()


def split_lines(raw: str) -> Tuple[str, ...]:
    text = raw.replace("\r\n", "\n").replace("\r", "\n")
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return tuple(lines)


def classify(raw: str) -> FormValue:
    """
    Type a raw decoded value.

    Empty text is EMPTY, text with a line break is Lines, an integer or
    decimal numeral (``12``, ``-3.50``, ``.5``) is a Number, anything else a
    Token.
    """
    if raw == "":
        return EMPTY
    if "\n" in raw or "\r" in raw:
        return Lines(lines=split_lines(raw))
    if _NUMERAL.match(raw):
        return Number(value=Decimal(raw) if "." in raw else int(raw))
    return Token(text=raw)


def as_form_value(value: Any) -> FormValue:
    if isinstance(value, (EmptyValue, Number, Token, Lines)):
        return value
    if value is None:
        return EMPTY
    if isinstance(value, bool):
        return Token(text="on" if value else "off")
    if isinstance(value, (int, Decimal)):
        return Number(value=value)
    if isinstance(value, (list, tuple)):
        return Lines(lines=tuple(str(v) for v in value))
    return classify(str(value))


def form_value_text(value: FormValue) -> str:
    """Text of a value as the user typed it (lines joined with newlines)."""
    if isinstance(value, Token):
        return value.text
    if isinstance(value, Number):
        return format(value.value, "f") if isinstance(value.value, Decimal) else str(value.value)
    if isinstance(value, Lines):
        return "\n".join(value.lines)
    return ""


class FormDict(BaseModel):
    """Attribute/value pairs in submission order; repeated attributes are all kept."""

    model_config = ConfigDict(frozen=True)

    pairs: Tuple[Tuple[str, FormValue], ...] = Field(default=(), description="(attribute, value) pairs")

    @classmethod
    def of(cls, pairs: Union[Mapping[str, Any], Iterable[Tuple[str, Any]]]) -> "FormDict":
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        return cls(pairs=tuple((str(name), as_form_value(value)) for name, value in items))

    def get(self, attribute: str) -> FormValue:
        return get_form_value(self, attribute)

    def get_all(self, attribute: str) -> List[FormValue]:
        return [value for name, value in self.pairs if name == attribute]

    def names(self) -> List[str]:
        return [name for name, _ in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)


# CGI environment -------------------------------------------------------------

class RequestMethod(str, Enum):
    GET = "GET"
    POST = "POST"


class CgiEnv(BaseModel):
    """The CGI/1.1 variables a form handler reads, plus its request body."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    request_method: Optional[str] = Field(default=None, description="REQUEST_METHOD")
    query_string: Optional[str] = Field(default=None, description="QUERY_STRING")
    content_type: Optional[str] = Field(default=None, description="CONTENT_TYPE")
    content_length: Optional[str] = Field(default=None, description="CONTENT_LENGTH (decimal)")
    script_name: Optional[str] = Field(default=None, description="SCRIPT_NAME")
    server_name: Optional[str] = Field(default=None, description="SERVER_NAME")
    server_port: Optional[str] = Field(default=None, description="SERVER_PORT")
    body: Any = Field(default=b"", description="Request body: bytes or a binary stream")

    @classmethod
    def from_environ(cls, environ: Optional[Mapping[str, str]] = None,
                     body: Optional[Union[bytes, BinaryIO]] = None) -> "CgiEnv":
        """Read the CGI variables from ``environ`` (os.environ by default) and the body from stdin."""
        environ = os.environ if environ is None else environ
        return cls(
            request_method=environ.get("REQUEST_METHOD"),
            query_string=environ.get("QUERY_STRING"),
            content_type=environ.get("CONTENT_TYPE"),
            content_length=environ.get("CONTENT_LENGTH"),
            script_name=environ.get("SCRIPT_NAME"),
            server_name=environ.get("SERVER_NAME"),
            server_port=environ.get("SERVER_PORT"),
            body=body if body is not None else sys.stdin.buffer,
        )


def _content_length(env: CgiEnv) -> Optional[int]:
    if env.content_length in (None, ""):
        return None
    if not (env.content_length.isascii() and env.content_length.isdigit()):
        raise MalformedInput(f"CONTENT_LENGTH {env.content_length!r} is not a byte count", 0)
    return int(env.content_length)


def _read_body(env: CgiEnv) -> bytes:
    length = _content_length(env)
    body = env.body
    if isinstance(body, (bytes, bytearray)):
        data = bytes(body) if length is None else bytes(body[:length])
    elif length is None:
        data = body.read()
    else:
        chunks = []
        remaining = length
        while remaining > 0:
            chunk = body.read(remaining)
            if not chunk:
                break
            chunks.append(chunk)
            remaining -= len(chunk)
        data = b"".join(chunks)
    if length is not None and len(data) < length:
        raise MalformedInput(f"body ends after {len(data)} of {length} bytes", len(data))
    return data


# urlencoded ------------------------------------------------------------------

def _unquote(text: str, offset: int) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "+":
            out.append(" ")
        elif ch == "%":
            code = text[i + 1:i + 3]
            if len(code) < 2 or code[0] not in _HEX or code[1] not in _HEX:
                raise MalformedInput(f"bad percent escape {text[i:i + 3]!r}", offset + i)
            out.append(chr(int(code, 16)))
            i += 2
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def decode_urlencoded(data: Union[str, bytes]) -> List[Tuple[str, FormValue]]:
    """
    Decode ``a=1&b=x+y`` into typed pairs. Escapes decode as Latin-1.

    Raises:
        MalformedInput: a percent escape is not followed by two hex digits
    """
    text = data.decode("latin-1") if isinstance(data, (bytes, bytearray)) else data
    pairs = []
    offset = 0
    for field in text.split("&"):
        if field:
            name, eq, raw = field.partition("=")
            value_offset = offset + len(name) + len(eq)
            pairs.append((_unquote(name, offset), classify(_unquote(raw, value_offset))))
        offset += len(field) + 1
    return pairs


# multipart -------------------------------------------------------------------

_special = re.escape('()<>@,;:\\"/[]?={} \t\n\r')
_qstr = r'"(?:\\.|[^"])*"'
_value = r'(?:[^%s]+|%s)' % (_special, _qstr)
_re_option = re.compile(r'(?:;|^)\s*([^%s]+)\s*=\s*(%s)' % (_special, _value))


def header_unquote(value: str, filename: bool = False) -> str:
    if len(value) >= 2 and value[0] == value[-1] == '"':
        value = value[1:-1]
        if filename and (value[1:3] == ":\\" or value[:2] == "\\\\"):
            value = value.split("\\")[-1]  # full client path -> base name
        return value.replace("\\\\", "\\").replace('\\"', '"')
    return value


def parse_options_header(header: str) -> Tuple[str, Dict[str, str]]:
    """Split ``type/sub; key=value; ...`` into the lowercased type and its options."""
    if ";" not in header:
        return header.lower().strip(), {}
    ctype, tail = header.split(";", 1)
    options = {}
    for match in _re_option.finditer(tail):
        key = header_unquote(match.group(1)).lower().strip()
        options[key] = header_unquote(match.group(2), key == "filename")
    return ctype.lower().strip(), options


def _iter_lines(data: bytes) -> Iterator[Tuple[bytes, bytes, int]]:
    offset = 0
    for raw in data.splitlines(True):
        if raw.endswith(b"\r\n"):
            yield raw[:-2], b"\r\n", offset
        elif raw.endswith((b"\n", b"\r")):
            yield raw[:-1], raw[-1:], offset
        else:
            yield raw, b"", offset
        offset += len(raw)


class _Part:
    def __init__(self):
        self.headers: List[str] = []
        self.in_headers = True
        self.body: List[bytes] = []
        self.pending = b""

    def feed(self, line: bytes, nl: bytes) -> None:
        if self.in_headers:
            if not line:
                self.in_headers = False
            elif line[:1] in (b" ", b"\t") and self.headers:
                self.headers[-1] += " " + line.decode("latin-1").strip()
            else:
                self.headers.append(line.decode("latin-1"))
            return
        # The newline before a boundary belongs to the boundary
        self.body.append(self.pending + line)
        self.pending = nl

    def pairs(self) -> List[Tuple[str, FormValue]]:
        disposition = ""
        for header in self.headers:
            key, _, value = header.partition(":")
            if key.strip().lower() == "content-disposition":
                disposition = value.strip()
        _, options = parse_options_header(disposition)
        name = options.get("name")
        if name is None:
            logger.warning("multipart part without a field name skipped")
            return []
        pairs = [(name, classify(b"".join(self.body).decode("latin-1")))]
        if "filename" in options:
            filename = options["filename"]
            pairs.append((f"{name}_filename", Token(text=filename) if filename else EMPTY))
        return pairs


def decode_multipart(data: bytes, boundary: str) -> List[Tuple[str, FormValue]]:
    """
    Decode a multipart/form-data body.

    File parts yield their content like any other field plus a
    ``<name>_filename`` entry.

    Raises:
        MalformedInput: missing boundary or truncated stream
    """
    if not boundary:
        raise MalformedInput("multipart/form-data without a boundary", 0)
    separator = b"--" + boundary.encode("latin-1")
    terminator = separator + b"--"
    lines = _iter_lines(data)
    offset = 0
    for line, _, offset in lines:
        if line:
            break
    else:
        raise MalformedInput("empty multipart body", 0)
    if line.rstrip() != separator:
        raise MalformedInput("multipart body does not start with its boundary", offset)

    pairs: List[Tuple[str, FormValue]] = []
    part = _Part()
    for line, nl, offset in lines:
        stripped = line.rstrip(b" \t")
        if stripped == terminator:
            pairs.extend(part.pairs())
            return pairs
        if stripped == separator:
            pairs.extend(part.pairs())
            part = _Part()
        else:
            part.feed(line, nl)
    raise MalformedInput("multipart body ends before its closing boundary", len(data))


# Operations ------------------------------------------------------------------

def get_form_input(env: Optional[CgiEnv] = None) -> FormDict:
    """
    Decode the form input of this request.

    GET reads QUERY_STRING; POST reads exactly CONTENT_LENGTH bytes of body,
    urlencoded or multipart. Anything else gives an empty FormDict.

    Raises:
        MalformedInput: bad percent escape, missing boundary, short body
    """
    env = env if env is not None else CgiEnv.from_environ()
    method = (env.request_method or "").upper()
    if method in ("GET", "HEAD"):
        return FormDict(pairs=tuple(decode_urlencoded(env.query_string or "")))
    if method != "POST":
        return FormDict()
    ctype, options = parse_options_header(env.content_type or URLENCODED_TYPES[0])
    if ctype in URLENCODED_TYPES:
        return FormDict(pairs=tuple(decode_urlencoded(_read_body(env))))
    if ctype == MULTIPART_TYPE:
        return FormDict(pairs=tuple(decode_multipart(_read_body(env), options.get("boundary", ""))))
    logger.warning("ignoring form input of type %s", ctype)
    return FormDict()


def get_form_value(form: FormDict, attribute: str) -> FormValue:
    """First value of ``attribute``; EMPTY when there is none. Never raises."""
    for name, value in form.pairs:
        if name == attribute:
            return value
    return EMPTY


def form_empty_value(value: FormValue) -> bool:
    """True for EMPTY and for text that is only spaces, tabs and line breaks."""
    if isinstance(value, EmptyValue):
        return True
    if isinstance(value, Token):
        return value.text.strip(_WHITESPACE) == ""
    if isinstance(value, Lines):
        return all(line.strip(_WHITESPACE) == "" for line in value.lines)
    return False


def form_default(value: FormValue, default: FormValue) -> FormValue:
    return default if form_empty_value(value) else value


def my_url(env: Optional[CgiEnv] = None) -> str:
    """
    URL of this CGI executable.

    Raises:
        MissingEnv: SERVER_NAME or SCRIPT_NAME is not set
    """
    env = env if env is not None else CgiEnv.from_environ(body=io.BytesIO())
    if not env.server_name:
        raise MissingEnv("SERVER_NAME")
    if env.script_name is None:
        raise MissingEnv("SCRIPT_NAME")
    port = env.server_port or "80"
    host = env.server_name if port == "80" else f"{env.server_name}:{port}"
    return f"http://{host}{env.script_name}"


def form_request_method(env: Optional[CgiEnv] = None) -> RequestMethod:
    """
    Raises:
        MissingEnv: REQUEST_METHOD is not set
        UnknownMethod: neither GET nor POST
    """
    env = env if env is not None else CgiEnv.from_environ(body=io.BytesIO())
    if not env.request_method:
        raise MissingEnv("REQUEST_METHOD")
    try:
        return RequestMethod(env.request_method.upper())
    except ValueError:
        raise UnknownMethod(env.request_method)


def url_query(form: Union[FormDict, Mapping[str, Any], Iterable[Tuple[str, Any]]]) -> str:
    """
    Encode pairs for appending to a URL (``a=x+y&b=2``).

    Raises:
        Unencodable: a value has several lines or is not Latin-1 text
    """
    if not isinstance(form, FormDict):
        form = FormDict.of(form)
    fields = []
    for name, value in form.pairs:
        if isinstance(value, Lines):
            raise Unencodable(name)
        try:
            fields.append(quote_plus(name, safe="", encoding="latin-1") + "="
                          + quote_plus(form_value_text(value), safe="", encoding="latin-1"))
        except UnicodeEncodeError:
            raise Unencodable(name, "value is not Latin-1 text")
    return "&".join(fields)
