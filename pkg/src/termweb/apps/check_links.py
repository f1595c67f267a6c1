"""
Link checker: report the links of one page that fail when followed.

Every ``href`` of every ``a`` environment in the page (searched depth
first) is resolved against the page's URL and probed with a HEAD request.
Links to other schemes are skipped. A link is bad when the probe times out,
cannot be made, or answers with a non-success status.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Iterable, Iterator, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from termweb.errors import HttpError, MalformedUrl, NotHttp, Timeout
from termweb.markup.codec import html2terms
from termweb.markup.model import Environment, Pair, Sequence
from termweb.settings import Settings, get_settings
from termweb.web.http_client import (
    Content, ContentType, Head, RequestTimeout, Status, StatusClass, fetch, response_param,
)
from termweb.web.urls import UrlInfo, url_info, url_info_relative, url_text

logger = logging.getLogger(__name__)


class BadLink(BaseModel):
    """``badlink(Link, Error)``."""

    model_config = ConfigDict(frozen=True)

    url: str = Field(..., description="Resolved link")
    reason: str = Field(..., description="Server phrase, 'Timeout' or the transport error")

    def __str__(self) -> str:
        return f"badlink {self.url} {self.reason}"


def page_links(terms: Iterable[Any]) -> Iterator[str]:
    """Hrefs of the anchors in ``terms``, depth first, in document order."""
    for term in terms:
        if isinstance(term, Sequence):
            yield from page_links(term.items)
        elif isinstance(term, Environment):
            if term.name == "a":
                for attr in term.attrs:
                    if isinstance(attr, Pair) and attr.name.lower() == "href":
                        yield attr.value
            yield from page_links(term.body)


def resolve_links(hrefs: Iterable[str], base: UrlInfo) -> List[UrlInfo]:
    links = []
    for href in hrefs:
        try:
            links.append(url_info_relative(href, base))
        except (NotHttp, MalformedUrl) as e:
            logger.debug("skipping %s: %s", href, e)
    return links


def probe(url: UrlInfo, timeout: int, settings: Optional[Settings] = None) -> Optional[str]:
    """Why ``url`` is a bad link, or None when a HEAD request succeeds."""
    try:
        params = fetch(url, [Head(), RequestTimeout(seconds=timeout)], settings)
    except Timeout:
        return "Timeout"
    except HttpError as e:
        return str(e)
    status = response_param(params, Status)
    if status.status_class is StatusClass.SUCCESS:
        return None
    return status.phrase or str(status.code)


def fetch_page(url: UrlInfo, settings: Optional[Settings] = None) -> List[Any]:
    """
    Fetch and parse an HTML page.

    Raises:
        HttpError: transport failure, a non-success status or a document
            that is not text/html
    """
    params = fetch(url, [], settings)
    status = response_param(params, Status)
    if status.status_class is not StatusClass.SUCCESS:
        raise HttpError(f"{url_text(url)}: {status.code} {status.phrase}")
    ctype = response_param(params, ContentType)
    if ctype is not None and (ctype.type, ctype.subtype) != ("text", "html"):
        raise HttpError(f"{url_text(url)} is {ctype.type}/{ctype.subtype}, not text/html")
    content = response_param(params, Content)
    return html2terms(content.data if content else b"")


def check_links(url: Union[str, UrlInfo], timeout: Optional[int] = None, workers: Optional[int] = None,
                settings: Optional[Settings] = None) -> List[BadLink]:
    """
    Probe every link of the page at ``url``.

    Args:
        url: Page to check
        timeout: Seconds per probe (settings.link_check_timeout by default)
        workers: Probes run in parallel (settings.link_check_workers by default)

    Returns:
        The bad links in document order
    """
    settings = settings or get_settings()
    base = url_info(url) if isinstance(url, str) else url
    timeout = timeout or settings.link_check_timeout
    links = resolve_links(page_links(fetch_page(base, settings)), base)
    logger.info("checking %d links of %s", len(links), url_text(base))

    with ThreadPoolExecutor(max_workers=workers or settings.link_check_workers) as executor:
        reasons = list(executor.map(lambda link: probe(link, timeout, settings), links))

    bad = [BadLink(url=url_text(link), reason=reason) for link, reason in zip(links, reasons) if reason is not None]
    for link in bad:
        logger.warning("%s", link)
    return bad
