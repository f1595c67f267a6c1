"""
Shared pytest fixtures: a local HTTP server with a small site, settings
with short timeouts, and the corpus directory.
"""
import os
import sys
import threading
import time
from email.utils import formatdate
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

# Add the src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from termweb.settings import Settings, reset_settings  # noqa: E402

CORPUS = Path(__file__).parent / "corpus"

STALL_SECONDS = 3
LAST_MODIFIED = 784111777  # Sun, 06 Nov 1994 08:49:37 GMT

LINKS_PAGE = b"""<html><head><title>Links</title></head><body>
<h1>Links</h1>
<ul>
<li><a href="/ok">fine</a>
<li><a href="doc">also fine</a>
<li><a href="/missing">gone</a>
<li><div><a href="/stall">slow</a></div>
<li><a href="mailto:clip@dia.fi.upm.es">mail</a>
</ul>
<a name="anchor-without-href">no link</a>
</body></html>
"""

CLEAN_PAGE = b"""<html><body><a href="/ok">one</a> <a href="http://localhost:PORT/doc">two</a></body></html>"""


class FixtureHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.0"

    def log_message(self, format, *args):
        pass

    def _record(self):
        self.server.requests.append((self.command, self.path, dict(self.headers)))

    def _send(self, code, body, content_type="text/html", extra=None):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in (extra or {}).items():
            self.send_header(name, value)
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(body)

    def _route(self):
        self._record()
        path = self.path.split("?", 1)[0]
        if path == "/page":
            self._send(200, LINKS_PAGE)
        elif path == "/clean":
            self._send(200, CLEAN_PAGE.replace(b"PORT", str(self.server.server_port).encode()))
        elif path == "/ok":
            self._send(200, b"<p>ok</p>")
        elif path == "/doc":
            since = self.headers.get("If-Modified-Since")
            if since == formatdate(LAST_MODIFIED, usegmt=True):
                self.send_response(304)
                self.end_headers()
                return
            self._send(200, b"<p>document</p>", extra={"Last-Modified": formatdate(LAST_MODIFIED, usegmt=True)})
        elif path == "/plain":
            self._send(200, b"just text", content_type="text/plain")
        elif path == "/stall":
            time.sleep(STALL_SECONDS)
            self._send(200, b"late")
        elif path == "/echo-agent":
            self._send(200, self.headers.get("User-Agent", "").encode("latin-1"), content_type="text/plain")
        elif path.startswith("/addr/"):
            target = Path(self.server.addr_directory) / path[len("/addr/"):]
            if target.is_file():
                self._send(200, target.read_bytes(), content_type="text/plain")
            else:
                self.send_error(404)
        elif path == "/moved":
            self._send(302, b"", extra={"Location": "/ok"})
        else:
            self.send_error(404)

    do_GET = _route
    do_HEAD = _route


class FixtureServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self):
        super().__init__(("127.0.0.1", 0), FixtureHandler)
        self.requests = []
        self.addr_directory = "."

    @property
    def base_url(self):
        return f"http://127.0.0.1:{self.server_port}"

    def url(self, path):
        return self.base_url + path


@pytest.fixture(scope="session")
def http_server():
    server = FixtureServer()
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    for name in list(os.environ):
        if name.startswith("TERMWEB_"):
            monkeypatch.delenv(name)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def settings(tmp_path):
    return Settings(http_timeout=5, link_check_timeout=1, rpc_timeout=5, rpc_idle_timeout=5,
                    addr_directory=str(tmp_path))


@pytest.fixture
def addr_dir(tmp_path):
    directory = tmp_path / "addr"
    directory.mkdir()
    return directory


@pytest.fixture
def corpus_files():
    return sorted(CORPUS.glob("*.html"))
