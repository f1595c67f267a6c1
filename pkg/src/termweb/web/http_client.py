"""
HTTP/1.0 document fetching over a plain TCP socket.

A request is described by a list of options (head, timeout, conditional
date, user agent, authorization, arbitrary header fields) and the answer is
a list of response parameters: the status, one parameter per header field
and the content. Redirects are returned as ``Location`` parameters, never
followed.
"""

import calendar
import logging
import re
import socket
import time
from datetime import datetime
from enum import Enum
from typing import Any, ClassVar, Iterable, List, Optional, Sequence, Tuple, Type, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, model_validator

from termweb.errors import BadDate, ConnectFailed, InvalidOption, OverLimit, ProtocolError, Timeout
from termweb.settings import Settings, get_settings
from termweb.web.forms import parse_options_header
from termweb.web.urls import UrlInfo, url_info, url_text

logger = logging.getLogger(__name__)

WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")
MONTHS = ("January", "February", "March", "April", "May", "June", "July", "August",
          "September", "October", "November", "December")
_SHORT_WEEKDAYS = {day[:3]: day for day in WEEKDAYS}
_SHORT_MONTHS = {month[:3]: month for month in MONTHS}

_TIME = re.compile(r"(\d\d):(\d\d):(\d\d)\Z")
_RFC1123 = re.compile(r"([A-Za-z]{3}), (\d{1,2}) ([A-Za-z]{3}) (\d{4}) (\d\d:\d\d:\d\d) GMT\Z")
_RFC850 = re.compile(r"([A-Za-z]+), (\d{1,2})-([A-Za-z]{3})-(\d{2}) (\d\d:\d\d:\d\d) GMT\Z")
_ASCTIME = re.compile(r"([A-Za-z]{3}) ([A-Za-z]{3}) +(\d{1,2}) (\d\d:\d\d:\d\d) (\d{4})\Z")
_STATUS_LINE = re.compile(r"HTTP/(\d+)\.(\d+)[ \t]+(\d{3})(?:[ \t]+(.*))?\Z")
_FIELD_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_\-]*\Z")

MAX_HEADER_BYTES = 256 * 1024


class _Record(BaseModel):
    model_config = ConfigDict(frozen=True)


# Dates -----------------------------------------------------------------------

class HttpDate(_Record):
    """``date(Weekday, Day, Month, Year, Time)`` with full weekday and month names."""

    weekday: str = Field(..., description="Full weekday name, e.g. Tuesday")
    day: int = Field(..., description="Day of the month")
    month: str = Field(..., description="Full month name, e.g. January")
    year: int = Field(..., description="Four-digit year")
    time: str = Field(..., description="HH:MM:SS, GMT")

    @model_validator(mode="after")
    def _calendar_valid(self) -> "HttpDate":
        if self.weekday not in WEEKDAYS:
            raise ValueError(f"unknown weekday {self.weekday!r}")
        if self.month not in MONTHS:
            raise ValueError(f"unknown month {self.month!r}")
        clock = _TIME.match(self.time)
        if not clock:
            raise ValueError(f"time {self.time!r} is not HH:MM:SS")
        moment = datetime(self.year, MONTHS.index(self.month) + 1, self.day, *map(int, clock.groups()))
        if WEEKDAYS[moment.weekday()] != self.weekday:
            raise ValueError(f"{self.day} {self.month} {self.year} is not a {self.weekday}")
        return self

    @classmethod
    def from_datetime(cls, moment: datetime) -> "HttpDate":
        return cls(weekday=WEEKDAYS[moment.weekday()], day=moment.day, month=MONTHS[moment.month - 1],
                   year=moment.year, time=moment.strftime("%H:%M:%S"))

    @classmethod
    def from_timestamp(cls, seconds: float) -> "HttpDate":
        return cls.from_datetime(datetime(*time.gmtime(seconds)[:6]))

    def to_datetime(self) -> datetime:
        hour, minute, second = map(int, self.time.split(":"))
        return datetime(self.year, MONTHS.index(self.month) + 1, self.day, hour, minute, second)

    def timestamp(self) -> int:
        return calendar.timegm(self.to_datetime().timetuple())


def format_http_date(date: HttpDate) -> str:
    """RFC 1123 wire form: ``Tue, 15 Jan 1985 06:14:02 GMT``."""
    return f"{date.weekday[:3]}, {date.day:02d} {date.month[:3]} {date.year:04d} {date.time} GMT"


def _make_date(value: str, weekday: str, day: str, month: str, year: int, clock: str) -> HttpDate:
    full_weekday = _SHORT_WEEKDAYS.get(weekday[:3].capitalize()) if len(weekday) >= 3 else None
    full_month = _SHORT_MONTHS.get(month.capitalize())
    if full_weekday is None or full_month is None:
        raise BadDate(value)
    if len(weekday) > 3 and weekday.capitalize() != full_weekday:
        raise BadDate(value)
    try:
        return HttpDate(weekday=full_weekday, day=int(day), month=full_month, year=year, time=clock)
    except (ValidationError, ValueError):
        raise BadDate(value)


def parse_http_date(value: str) -> HttpDate:
    """
    Read an HTTP date in RFC 1123, RFC 850 or asctime form.

    Two-digit RFC 850 years below 70 are taken as 20xx.

    Raises:
        BadDate: not a date in any of the three forms, or not a real day
    """
    text = value.strip()
    match = _RFC1123.match(text)
    if match:
        weekday, day, month, year, clock = match.groups()
        return _make_date(value, weekday, day, month, int(year), clock)
    match = _RFC850.match(text)
    if match:
        weekday, day, month, year, clock = match.groups()
        short_year = int(year)
        return _make_date(value, weekday, day, month, short_year + (2000 if short_year < 70 else 1900), clock)
    match = _ASCTIME.match(text)
    if match:
        weekday, month, day, clock, year = match.groups()
        return _make_date(value, weekday, day, month, int(year), clock)
    raise BadDate(value)


# Request options -------------------------------------------------------------

class Head(_Record):
    """Ask for the header only."""


class RequestTimeout(_Record):
    seconds: PositiveInt = Field(..., description="Give up after this many seconds")


class IfModifiedSince(_Record):
    date: HttpDate = Field(..., description="Only send the document if it changed after this date")


class UserAgent(_Record):
    name: str = Field(..., description="Replaces the default User-Agent")


class Authorization(_Record):
    scheme: str = Field(..., description="Authentication scheme, e.g. Basic")
    params: str = Field(..., description="Credentials as sent after the scheme")


class GenericField(_Record):
    """Any other header field; as an option the name maps ``accept_language`` -> ``Accept-Language``."""

    kind: ClassVar[str] = "generic_field"

    name: str = Field(..., description="Field name")
    value: str = Field(..., description="Field value")


RequestOption = Union[Head, RequestTimeout, IfModifiedSince, UserAgent, Authorization, GenericField]


# Response parameters ---------------------------------------------------------

class StatusClass(str, Enum):
    INFORMATIONAL = "informational"
    SUCCESS = "success"
    REDIRECTION = "redirection"
    REQUEST_ERROR = "request_error"
    SERVER_ERROR = "server_error"
    EXTENSION_CODE = "extension_code"


def status_class(code: int) -> StatusClass:
    return {
        1: StatusClass.INFORMATIONAL,
        2: StatusClass.SUCCESS,
        3: StatusClass.REDIRECTION,
        4: StatusClass.REQUEST_ERROR,
        5: StatusClass.SERVER_ERROR,
    }.get(code // 100 if 0 <= code <= 999 else -1, StatusClass.EXTENSION_CODE)


class Content(_Record):
    kind: ClassVar[str] = "content"
    data: bytes = Field(..., description="Document body")


class Status(_Record):
    kind: ClassVar[str] = "status"
    status_class: StatusClass = Field(..., description="Class derived from the code")
    code: int = Field(..., description="Three-digit status code")
    phrase: str = Field(default="", description="Reason phrase")


class Pragma(_Record):
    kind: ClassVar[str] = "pragma"
    data: str = Field(..., description="Raw Pragma value")


class MessageDate(_Record):
    kind: ClassVar[str] = "message_date"
    date: HttpDate


class Location(_Record):
    kind: ClassVar[str] = "location"
    url: str = Field(..., description="Where the document moved")


class HttpServer(_Record):
    kind: ClassVar[str] = "http_server"
    text: str


class Allow(_Record):
    kind: ClassVar[str] = "allow"
    methods: Tuple[str, ...]


class LastModified(_Record):
    kind: ClassVar[str] = "last_modified"
    date: HttpDate


class Expires(_Record):
    kind: ClassVar[str] = "expires"
    date: HttpDate


class ContentType(_Record):
    kind: ClassVar[str] = "content_type"
    type: str
    subtype: str
    params: Tuple[Tuple[str, str], ...] = ()


class ContentEncoding(_Record):
    kind: ClassVar[str] = "content_encoding"
    text: str


class ContentLength(_Record):
    kind: ClassVar[str] = "content_length"
    length: int


class Authenticate(_Record):
    kind: ClassVar[str] = "authenticate"
    challenges: Tuple[Tuple[str, str], ...] = Field(..., description="(scheme, parameters) per challenge")


ResponseParam = Union[Content, Status, Pragma, MessageDate, Location, HttpServer, Allow, LastModified,
                      Expires, ContentType, ContentEncoding, ContentLength, Authenticate, GenericField]


def response_param(params: Iterable[Any], kind: Union[str, Type[BaseModel]]) -> Optional[Any]:
    """First parameter of a kind (a class or its name such as ``"last_modified"``), else None."""
    for param in params:
        if isinstance(kind, str):
            if getattr(param, "kind", None) == kind:
                return param
        elif isinstance(param, kind):
            return param
    return None


def _date_param(cls: Type[_Record], name: str, value: str) -> Any:
    try:
        return cls(date=parse_http_date(value))
    except BadDate:
        logger.debug("unparseable %s date %r kept as a generic field", name, value)
        return GenericField(name=name, value=value)


def header_param(name: str, value: str) -> Any:
    """Map one response header field to its parameter."""
    key = name.strip().lower()
    value = value.strip()
    generic = GenericField(name=key.replace("-", "_"), value=value)
    if key == "pragma":
        return Pragma(data=value)
    if key == "date":
        return _date_param(MessageDate, generic.name, value)
    if key == "last-modified":
        return _date_param(LastModified, generic.name, value)
    if key == "expires":
        return _date_param(Expires, generic.name, value)
    if key == "location":
        return Location(url=value)
    if key == "server":
        return HttpServer(text=value)
    if key == "allow":
        return Allow(methods=tuple(m.strip() for m in value.split(",") if m.strip()))
    if key == "content-type":
        full, options = parse_options_header(value)
        main, slash, sub = full.partition("/")
        if not slash or not main or not sub:
            return generic
        return ContentType(type=main, subtype=sub, params=tuple(options.items()))
    if key == "content-encoding":
        return ContentEncoding(text=value)
    if key == "content-length":
        if value.isascii() and value.isdigit():
            return ContentLength(length=int(value))
        return generic
    if key == "www-authenticate":
        scheme, _, params = value.partition(" ")
        return Authenticate(challenges=((scheme, params.strip()),))
    return generic


# Fetching --------------------------------------------------------------------

def _field_name(name: str) -> str:
    return "-".join(part.capitalize() for part in name.replace("_", "-").split("-"))


def _check_value(name: str, value: str) -> str:
    if "\r" in value or "\n" in value:
        raise InvalidOption(f"{name}: header values cannot contain line breaks")
    return value


def _as_option(option: Any) -> Any:
    if option == "head":
        return Head()
    if isinstance(option, (Head, RequestTimeout, IfModifiedSince, UserAgent, Authorization, GenericField)):
        return option
    raise InvalidOption(f"not a request option: {option!r}")


def build_request(url: UrlInfo, options: Sequence[Any], settings: Settings) -> Tuple[bytes, bool, int]:
    """
    The request bytes, whether it is a HEAD request, and the timeout.

    Raises:
        InvalidOption: unknown option, repeated timeout or bad field
    """
    opts = [_as_option(o) for o in options]
    timeouts = [o for o in opts if isinstance(o, RequestTimeout)]
    if len(timeouts) > 1:
        raise InvalidOption("at most one timeout option is allowed")
    head = any(isinstance(o, Head) for o in opts)
    agent = next((o.name for o in opts if isinstance(o, UserAgent)), settings.user_agent)
    host = url.host if url.port == 80 else f"{url.host}:{url.port}"

    lines = [f"{'HEAD' if head else 'GET'} {url.document} HTTP/1.0", f"Host: {host}",
             f"User-Agent: {_check_value('user_agent', agent)}"]
    for option in opts:
        if isinstance(option, IfModifiedSince):
            lines.append(f"If-Modified-Since: {format_http_date(option.date)}")
        elif isinstance(option, Authorization):
            lines.append(f"Authorization: {_check_value('authorization', option.scheme)} "
                         f"{_check_value('authorization', option.params)}")
        elif isinstance(option, GenericField):
            if not _FIELD_NAME.match(option.name):
                raise InvalidOption(f"bad field name {option.name!r}")
            lines.append(f"{_field_name(option.name)}: {_check_value(option.name, option.value)}")
    request = ("\r\n".join(lines) + "\r\n\r\n").encode("latin-1", "replace")
    timeout = timeouts[0].seconds if timeouts else settings.http_timeout
    return request, head, timeout


class _Deadline:
    def __init__(self, target: str, seconds: float):
        self.target = target
        self.seconds = seconds
        self.end = time.monotonic() + seconds

    def remaining(self) -> float:
        left = self.end - time.monotonic()
        if left <= 0:
            raise Timeout(self.target, self.seconds)
        return left


def _recv(sock: socket.socket, deadline: _Deadline) -> bytes:
    sock.settimeout(deadline.remaining())
    try:
        return sock.recv(65536)
    except socket.timeout:
        raise Timeout(deadline.target, deadline.seconds)
    except OSError as e:
        raise ConnectFailed(deadline.target, str(e))


def _split_header(buf: bytes) -> Optional[Tuple[bytes, bytes]]:
    ends = [(i, len(sep)) for sep in (b"\r\n\r\n", b"\n\n") for i in [buf.find(sep)] if i >= 0]
    if not ends:
        return None
    index, size = min(ends)
    return buf[:index], buf[index + size:]


def parse_response_header(header: bytes) -> Tuple[Status, List[Any]]:
    """
    Parse the status line and header fields.

    Raises:
        ProtocolError: the status line is not ``HTTP/x.y NNN phrase``
    """
    lines = header.decode("latin-1").replace("\r\n", "\n").split("\n")
    match = _STATUS_LINE.match(lines[0].strip())
    if not match:
        raise ProtocolError(f"bad status line {lines[0][:80]!r}")
    code = int(match.group(3))
    status = Status(status_class=status_class(code), code=code, phrase=(match.group(4) or "").strip())

    fields: List[List[str]] = []
    for line in lines[1:]:
        if line[:1] in (" ", "\t") and fields:
            fields[-1][1] += " " + line.strip()
        elif ":" in line:
            name, _, value = line.partition(":")
            fields.append([name, value])
        elif line.strip():
            logger.warning("ignoring malformed header line %r", line[:80])
    return status, [header_param(name, value) for name, value in fields]


def fetch(url: UrlInfo, options: Sequence[Any] = (), settings: Optional[Settings] = None) -> List[Any]:
    """
    Fetch a document over one HTTP/1.0 connection.

    Returns:
        The status, then one parameter per header field, then the content
        (absent for HEAD requests and 1xx/204/304 answers)

    Raises:
        Timeout: no complete answer within the timeout
        ConnectFailed: the connection could not be made or was reset
        ProtocolError: the answer is not HTTP
        OverLimit: the body is larger than max_response_bytes
        InvalidOption: bad request options
    """
    settings = settings or get_settings()
    request, head, timeout = build_request(url, options, settings)
    target = url_text(url)
    deadline = _Deadline(target, timeout)
    logger.debug("%s", request.split(b"\r\n", 1)[0].decode("latin-1"))

    try:
        sock = socket.create_connection((url.host, url.port), timeout=deadline.remaining())
    except socket.timeout:
        raise Timeout(target, timeout)
    except OSError as e:
        raise ConnectFailed(target, str(e))

    with sock:
        try:
            sock.sendall(request)
        except socket.timeout:
            raise Timeout(target, timeout)
        except OSError as e:
            raise ConnectFailed(target, str(e))

        buf = b""
        while True:
            split = _split_header(buf)
            if split is not None:
                break
            if len(buf) > MAX_HEADER_BYTES:
                raise ProtocolError("response header too long")
            chunk = _recv(sock, deadline)
            if not chunk:
                raise ProtocolError("connection closed before the end of the header" if buf else "empty response")
            buf += chunk
        header, body = split
        status, params = parse_response_header(header)
        result: List[Any] = [status] + params

        if head or status.code in (204, 304) or 100 <= status.code < 200:
            return result

        length_param = response_param(params, ContentLength)
        expected = length_param.length if length_param else None
        limit = settings.max_response_bytes
        if expected is not None and expected > limit:
            raise OverLimit(limit)
        while expected is None or len(body) < expected:
            if len(body) > limit:
                raise OverLimit(limit)
            chunk = _recv(sock, deadline)
            if not chunk:
                break
            body += chunk
        if len(body) > limit:
            raise OverLimit(limit)
        if expected is not None:
            if len(body) < expected:
                raise ProtocolError(f"body ends after {len(body)} of {expected} bytes")
            body = body[:expected]
    result.append(Content(data=body))
    return result


def fetch_url(url: Union[str, UrlInfo], options: Sequence[Any] = (), settings: Optional[Settings] = None) -> List[Any]:
    """fetch() taking the URL as text."""
    return fetch(url_info(url) if isinstance(url, str) else url, options, settings)
