"""
HTTP URLs as structures: http://host[:port]/document.

Only http URLs are represented. The document keeps the query string and
drops the fragment; ``.`` and ``..`` segments are always resolved.
"""

import re
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator

from termweb.errors import MalformedUrl, NotHttp

DEFAULT_PORT = 80

_SCHEME = re.compile(r"([A-Za-z][A-Za-z0-9+.\-]*):")
_HOST = re.compile(r"[^\s/?#@:\[\]]+\Z")


class UrlInfo(BaseModel):
    """``http(Host, Port, Document)``."""

    model_config = ConfigDict(frozen=True)

    host: str = Field(..., description="Lowercased host name")
    port: int = Field(default=DEFAULT_PORT, gt=0, lt=65536, description="TCP port")
    document: str = Field(default="/", description="Path plus optional ?query, always starting with /")

    @field_validator("host")
    @classmethod
    def _valid_host(cls, value: str) -> str:
        if not _HOST.match(value):
            raise ValueError(f"invalid host {value!r}")
        return value

    @field_validator("document")
    @classmethod
    def _rooted(cls, value: str) -> str:
        if not value.startswith("/"):
            raise ValueError("document must start with /")
        return value

    @property
    def scheme(self) -> str:
        return "http"

    @property
    def path(self) -> str:
        return self.document.split("?", 1)[0]

    def __str__(self) -> str:
        return url_text(self)


def remove_dot_segments(path: str) -> str:
    """Resolve ``.`` and ``..`` in an absolute path; ``..`` above the root stays at the root."""
    segments = path.split("/")[1:]
    out: List[str] = []
    for i, segment in enumerate(segments):
        last = i == len(segments) - 1
        if segment == ".":
            if last:
                out.append("")
        elif segment == "..":
            if out:
                out.pop()
            if last:
                out.append("")
        else:
            out.append(segment)
    return "/" + "/".join(out)


def _document(path: str, query: str, has_query: bool) -> str:
    document = remove_dot_segments(path or "/")
    return document + "?" + query if has_query else document


def url_info(url: str) -> UrlInfo:
    """
    Parse an absolute http URL.

    Raises:
        NotHttp: the URL has another scheme
        MalformedUrl: no scheme, no host, bad port, or user information
    """
    text = url.strip()
    scheme = _SCHEME.match(text)
    if not scheme:
        raise MalformedUrl(url, "no scheme")
    if scheme.group(1).lower() != "http":
        raise NotHttp(url)
    rest = text[scheme.end():]
    if not rest.startswith("//"):
        raise MalformedUrl(url, "missing //host")
    rest = rest[2:]
    cut = min((i for i in (rest.find("/"), rest.find("?"), rest.find("#")) if i >= 0), default=len(rest))
    authority, tail = rest[:cut], rest[cut:]
    if "@" in authority:
        raise MalformedUrl(url, "user information is not supported")

    host, colon, port_text = authority.partition(":")
    port = DEFAULT_PORT
    if colon:
        if not (port_text.isascii() and port_text.isdigit()) or not 0 < int(port_text) < 65536:
            raise MalformedUrl(url, f"bad port {port_text!r}")
        port = int(port_text)
    if not _HOST.match(host):
        raise MalformedUrl(url, "bad or missing host")

    tail = tail.split("#", 1)[0]
    path, q, query = tail.partition("?")
    return UrlInfo(host=host.lower(), port=port, document=_document(path, query, bool(q)))


def url_text(info: UrlInfo) -> str:
    port = "" if info.port == DEFAULT_PORT else f":{info.port}"
    return f"http://{info.host}{port}{info.document}"


def url_info_relative(ref: str, base: UrlInfo) -> UrlInfo:
    """
    Resolve a link found in the page at ``base``.

    Absolute references are parsed as by url_info. Root-relative ones
    replace the base document, plain relative ones its last segment.

    Raises:
        NotHttp: an absolute reference with another scheme
        MalformedUrl: an absolute reference that does not parse
    """
    text = ref.strip()
    if _SCHEME.match(text):
        return url_info(text)
    if text.startswith("//"):
        return url_info("http:" + text)

    text = text.split("#", 1)[0]
    path, q, query = text.partition("?")
    if not path:
        document = base.path + "?" + query if q else base.document
    elif path.startswith("/"):
        document = _document(path, query, bool(q))
    else:
        directory = base.path[:base.path.rfind("/") + 1]
        document = _document(directory + path, query, bool(q))
    return UrlInfo(host=base.host, port=base.port, document=document)
