"""
Publishing and locating active-module addresses.

Three strategies, each with a publish side (used by serve) and a locate
side (used by stubs):

- file: ``<module>.addr`` files in a directory shared by all machines;
- web: the same files, in a directory served over HTTP and fetched back;
- name server: an active module at a well-known address that records
  ``register(Module, addr(Host, Port))`` and answers ``lookup(Module, A)``.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

from termweb.actmod.server import ActiveModule, Registry, call_remote, serve
from termweb.actmod.wire import GoalCall, ModuleAddress, RemoteError, Success
from termweb.errors import ActmodError, HttpError, LocateFailed, PublishFailed, UrlError, WireError
from termweb.settings import Settings, get_settings
from termweb.terms import PLACEHOLDER, Atom
from termweb.web.http_client import Content, RequestTimeout, Status, StatusClass, fetch_url, response_param

logger = logging.getLogger(__name__)

ADDR_SUFFIX = ".addr"


def format_addr(addr: ModuleAddress) -> str:
    return f"{addr.host} {addr.port}\n"


def parse_addr(text: str, module: str) -> ModuleAddress:
    fields = text.split()
    if len(fields) != 2 or not (fields[1].isascii() and fields[1].isdigit()):
        raise LocateFailed(module, f"malformed address {text.strip()[:80]!r}")
    try:
        return ModuleAddress(host=fields[0], port=int(fields[1]))
    except ValueError as e:
        raise LocateFailed(module, f"malformed address: {e}")


def addr_file(directory: Union[str, Path], module: str) -> Path:
    return Path(directory) / f"{module}{ADDR_SUFFIX}"


# File based ------------------------------------------------------------------

def publish_filebased(module: str, addr: ModuleAddress, directory: Optional[Union[str, Path]] = None,
                      settings: Optional[Settings] = None) -> Path:
    """
    Write ``<module>.addr`` atomically (temporary file, then rename).

    Raises:
        PublishFailed: the directory is missing or not writable
    """
    directory = Path(directory or (settings or get_settings()).addr_directory)
    target = addr_file(directory, module)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{module}.", suffix=".tmp", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(format_addr(addr))
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as e:
        raise PublishFailed(module, str(e))
    logger.info("published %s at %s in %s", module, addr, target)
    return target


def locate_filebased(module: str, directory: Optional[Union[str, Path]] = None,
                     settings: Optional[Settings] = None) -> ModuleAddress:
    """
    Raises:
        LocateFailed: no readable, well-formed ``<module>.addr``
    """
    directory = Path(directory or (settings or get_settings()).addr_directory)
    try:
        text = addr_file(directory, module).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise LocateFailed(module)
    except OSError as e:
        raise LocateFailed(module, str(e))
    return parse_addr(text, module)


class FileDiscovery:
    def __init__(self, directory: Optional[Union[str, Path]] = None, settings: Optional[Settings] = None):
        self.directory = Path(directory or (settings or get_settings()).addr_directory)

    def publish(self, module: str, addr: ModuleAddress) -> None:
        publish_filebased(module, addr, self.directory)

    def locate(self, module: str) -> ModuleAddress:
        return locate_filebased(module, self.directory)


# Web based -------------------------------------------------------------------

class WebDiscovery:
    """
    Addresses posted at a web address.

    Publishing writes ``<module>.addr`` into ``directory``, which some HTTP
    server exposes at ``base_url``; locating fetches it from there.
    """

    def __init__(self, base_url: str, directory: Optional[Union[str, Path]] = None,
                 settings: Optional[Settings] = None):
        self.base_url = base_url.rstrip("/")
        self.directory = Path(directory) if directory is not None else None
        self.settings = settings or get_settings()

    def publish(self, module: str, addr: ModuleAddress) -> None:
        if self.directory is None:
            raise PublishFailed(module, "no directory to post the address in")
        publish_filebased(module, addr, self.directory)

    def locate(self, module: str) -> ModuleAddress:
        url = f"{self.base_url}/{module}{ADDR_SUFFIX}"
        try:
            params = fetch_url(url, [RequestTimeout(seconds=self.settings.rpc_timeout)], self.settings)
        except (HttpError, UrlError) as e:
            raise LocateFailed(module, str(e))
        status = response_param(params, Status)
        if status.status_class is not StatusClass.SUCCESS:
            raise LocateFailed(module, f"{url}: {status.code} {status.phrase}")
        content = response_param(params, Content)
        return parse_addr(content.data.decode("latin-1") if content else "", module)


# Name server -----------------------------------------------------------------

NAMESERVER_MODULE = "nameserver"


def _module_key(module: Any) -> str:
    if isinstance(module, Atom):
        return module.name
    if isinstance(module, str):
        return module
    raise WireError(f"module names are text, got {module!r}")


def nameserver_registry() -> Registry:
    """The name server's operations: register/2 and lookup/2."""
    registry = Registry(NAMESERVER_MODULE)
    table: Dict[str, Any] = {}

    @registry.export("register", 2, mutating=True)
    def register(module: Any, address: Any) -> Any:
        ModuleAddress.from_term(address)
        table[_module_key(module)] = address
        logger.info("registered %s at %s", _module_key(module), address)
        return (module, address)

    @registry.export("lookup", 2)
    def lookup(module: Any, _address: Any) -> Any:
        address = table.get(_module_key(module))
        return None if address is None else (module, address)

    return registry


def run_nameserver(host: Optional[str] = None, port: Optional[int] = None,
                   settings: Optional[Settings] = None) -> ActiveModule:
    settings = settings or get_settings()
    return serve(nameserver_registry(), None, host, port if port is not None else settings.nameserver_port, settings)


class NameServerDiscovery:
    def __init__(self, address: Optional[ModuleAddress] = None, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.address = address or ModuleAddress(host=self.settings.nameserver_host,
                                                port=self.settings.nameserver_port)

    def publish(self, module: str, addr: ModuleAddress) -> None:
        call = GoalCall(operation="register", args=(module, addr.to_term()))
        try:
            outcome = call_remote(self.address, call, settings=self.settings)
        except (HttpError, ActmodError) as e:
            raise PublishFailed(module, f"name server {self.address}: {e}")
        if not isinstance(outcome, Success):
            reason = outcome.message if isinstance(outcome, RemoteError) else "registration refused"
            raise PublishFailed(module, reason)

    def locate(self, module: str) -> ModuleAddress:
        call = GoalCall(operation="lookup", args=(module, PLACEHOLDER))
        try:
            outcome = call_remote(self.address, call, settings=self.settings)
            if isinstance(outcome, Success):
                return ModuleAddress.from_term(outcome.bindings[1])
        except (HttpError, ActmodError) as e:
            raise LocateFailed(module, f"name server {self.address}: {e}")
        if isinstance(outcome, RemoteError):
            raise LocateFailed(module, outcome.message)
        raise LocateFailed(module, "not registered with the name server")


def publish_nameserver(module: str, addr: ModuleAddress, settings: Optional[Settings] = None) -> None:
    NameServerDiscovery(settings=settings).publish(module, addr)


def locate_nameserver(module: str, settings: Optional[Settings] = None) -> ModuleAddress:
    return NameServerDiscovery(settings=settings).locate(module)


def discovery_from_spec(spec: str, settings: Optional[Settings] = None) -> Any:
    """
    Build a strategy from ``file:DIR``, ``nameserver[:HOST:PORT]``,
    ``web:URL[,DIR]`` or ``addr:HOST:PORT`` (a fixed address, locate only).

    Raises:
        ValueError: unknown strategy or malformed parameters
    """
    kind, _, rest = spec.partition(":")
    if kind == "file":
        return FileDiscovery(rest or None, settings)
    if kind == "nameserver":
        if not rest:
            return NameServerDiscovery(settings=settings)
        host, _, port = rest.rpartition(":")
        return NameServerDiscovery(ModuleAddress(host=host, port=int(port)), settings)
    if kind == "web":
        url, comma, directory = rest.rpartition(",")
        return WebDiscovery(url, directory, settings) if comma else WebDiscovery(rest, None, settings)
    if kind == "addr":
        host, _, port = rest.rpartition(":")
        fixed = ModuleAddress(host=host, port=int(port))
        return lambda module: fixed
    raise ValueError(f"unknown discovery strategy {spec!r}")
