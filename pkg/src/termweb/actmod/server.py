"""
Active modules: serving a registry of operations, and calling them remotely.

A Registry holds the operations a module exports. ``serve`` binds a socket
on an ephemeral port, publishes the address and answers calls on a
background thread until shut down. ``call_remote`` runs one call against an
address; ``import_stub`` gives callables that locate the module and call it.

Handlers receive the call's arguments and return the bound arguments as a
tuple of the same arity (success), or None/False (failure). Handlers marked
``mutating`` run alone; the others may run concurrently with each other.
"""

import inspect
import logging
import socket
import socketserver
import threading
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from termweb.actmod.wire import (
    CallOutcome, Failure, FrameTooLarge, GoalCall, ModuleAddress, RemoteError, Success,
    decode_call, decode_outcome, encode_call, encode_outcome, read_frame, write_frame,
)
from termweb.errors import BindFailed, ConnectFailed, PublishFailed, RegistryFrozen, TermwebError, Timeout, WireError
from termweb.settings import Settings, get_settings

logger = logging.getLogger(__name__)


class _ReadWriteLock:
    """Many readers or one writer."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self) -> Iterator[None]:
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self) -> Iterator[None]:
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class Operation(BaseModel):
    """One exported operation ``name/arity``."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., description="Operation name")
    arity: int = Field(..., ge=0, description="Number of arguments")
    handler: Callable[..., Any] = Field(..., description="Function of the call's arguments")
    mutating: bool = Field(default=False, description="Changes shared state; runs exclusively")


class Registry:
    """
    The operations exported by one active module.

    A registry is frozen once serve() starts it: the set of operations a
    running module answers does not change.
    """

    def __init__(self, name: str):
        self.name = name
        self._operations: Dict[Tuple[str, int], Operation] = {}
        self._lock = _ReadWriteLock()
        self._frozen = False

    def add(self, name: str, arity: int, handler: Callable[..., Any], mutating: bool = False) -> Operation:
        if self._frozen:
            raise RegistryFrozen(self.name, f"{name}/{arity}")
        operation = Operation(name=name, arity=arity, handler=handler, mutating=mutating)
        self._operations[(name, arity)] = operation
        return operation

    def export(self, name: Optional[str] = None, arity: Optional[int] = None,
               mutating: bool = False) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
        """Decorator form of add(); name and arity default to the function's."""
        def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
            count = arity if arity is not None else len(inspect.signature(func).parameters)
            self.add(name or func.__name__, count, func, mutating)
            return func
        return decorator

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    def operations(self) -> List[Tuple[str, int]]:
        return sorted(self._operations)

    def __len__(self) -> int:
        return len(self._operations)

    def invoke(self, call: GoalCall) -> CallOutcome:
        """Run a call in-process; exactly what a remote caller gets back."""
        operation = self._operations.get((call.operation, call.arity))
        if operation is None:
            return RemoteError(message=f"unknown operation {call.operation}/{call.arity}")
        guard = self._lock.write() if operation.mutating else self._lock.read()
        try:
            with guard:
                result = operation.handler(*call.args)
        except Exception as e:
            logger.warning("%s/%d raised %s: %s", call.operation, call.arity, type(e).__name__, e)
            return RemoteError(message=f"{type(e).__name__}: {e}")
        if result is None or result is False:
            return Failure()
        if result is True:
            return Success(bindings=call.args)
        if isinstance(result, tuple) and len(result) == call.arity:
            return Success(bindings=result)
        return RemoteError(message=f"{call.operation}/{call.arity} returned {type(result).__name__}, "
                                   f"expected a tuple of {call.arity} values")


# Server ----------------------------------------------------------------------

class _ConnectionHandler(socketserver.BaseRequestHandler):
    server: "_ModuleServer"

    def handle(self) -> None:
        sock: socket.socket = self.request
        settings = self.server.settings
        sock.settimeout(settings.rpc_idle_timeout)
        while True:
            try:
                payload = read_frame(sock, settings.rpc_max_frame)
            except FrameTooLarge as e:
                logger.warning("closing connection from %s: %s", self.client_address, e)
                self._answer(RemoteError(message=str(e)))
                return
            except (WireError, OSError) as e:
                logger.debug("connection from %s ended: %s", self.client_address, e)
                return
            if payload is None:
                return
            try:
                call = decode_call(payload)
            except WireError as e:
                logger.warning("malformed request from %s: %s", self.client_address, e)
                outcome: CallOutcome = RemoteError(message=f"malformed request: {e}")
            else:
                outcome = self.server.registry.invoke(call)
            if not self._answer(outcome):
                return

    def _answer(self, outcome: CallOutcome) -> bool:
        try:
            write_frame(self.request, encode_outcome(outcome))
            return True
        except OSError as e:
            logger.debug("cannot answer %s: %s", self.client_address, e)
            return False


class _ModuleServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: Tuple[str, int], registry: Registry, settings: Settings):
        self.registry = registry
        self.settings = settings
        super().__init__(address, _ConnectionHandler)


Publisher = Callable[[str, ModuleAddress], None]


class ActiveModule:
    """A running server; use as a context manager or call shutdown()."""

    def __init__(self, server: _ModuleServer, address: ModuleAddress):
        self._server = server
        self.address = address
        self.registry = server.registry
        self._thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.1},
                                        name=f"actmod-{server.registry.name}", daemon=True)

    def _start(self) -> None:
        self._thread.start()

    @property
    def running(self) -> bool:
        return self._thread.is_alive()

    def wait(self, timeout: Optional[float] = None) -> None:
        self._thread.join(timeout)

    def shutdown(self) -> None:
        if self._thread.is_alive():
            self._server.shutdown()
            self._thread.join()
        self._server.server_close()
        logger.info("%s at %s shut down", self.registry.name, self.address)

    def __enter__(self) -> "ActiveModule":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.shutdown()


def _publisher(publisher: Any) -> Optional[Publisher]:
    if publisher is None or callable(publisher):
        return publisher
    return publisher.publish


def serve(registry: Registry, publisher: Any = None, host: Optional[str] = None, port: int = 0,
          settings: Optional[Settings] = None) -> ActiveModule:
    """
    Start serving ``registry``.

    Args:
        registry: Operations to export
        publisher: Callable ``(module, address)`` or an object with publish();
            None publishes nowhere
        host: Interface to bind (settings.rpc_bind_host by default)
        port: Port to bind; 0 picks an ephemeral one

    Raises:
        BindFailed: the socket could not be bound
        PublishFailed: the address could not be published
    """
    settings = settings or get_settings()
    if not len(registry):
        raise BindFailed(f"{registry.name} exports no operations")
    bind_host = host or settings.rpc_bind_host
    try:
        server = _ModuleServer((bind_host, port), registry, settings)
    except OSError as e:
        raise BindFailed(f"cannot bind {bind_host}:{port}: {e}")

    public_host = socket.getfqdn() if bind_host in ("", "0.0.0.0") else bind_host
    address = ModuleAddress(host=public_host, port=server.server_address[1])
    publish = _publisher(publisher)
    if publish is not None:
        try:
            publish(registry.name, address)
        except PublishFailed:
            server.server_close()
            raise
        except (OSError, TermwebError) as e:
            server.server_close()
            raise PublishFailed(registry.name, str(e))

    registry.freeze()
    module = ActiveModule(server, address)
    module._start()
    logger.info("%s listening on %s", registry.name, address)
    return module


# Client ----------------------------------------------------------------------

def _as_call(call: Union[GoalCall, Tuple[str, Sequence[Any]]]) -> GoalCall:
    if isinstance(call, GoalCall):
        return call
    operation, args = call
    return GoalCall(operation=operation, args=tuple(args))


def call_remote(addr: ModuleAddress, call: Union[GoalCall, Tuple[str, Sequence[Any]]],
                timeout: Optional[float] = None, settings: Optional[Settings] = None) -> CallOutcome:
    """
    Run one call on the module at ``addr``.

    Raises:
        ConnectFailed: nothing accepts connections at the address
        Timeout: no answer within ``timeout`` seconds (settings.rpc_timeout)
        WireError: the answer is not a valid outcome
    """
    settings = settings or get_settings()
    call = _as_call(call)
    seconds = timeout if timeout is not None else settings.rpc_timeout
    target = str(addr)
    try:
        sock = socket.create_connection((addr.host, addr.port), timeout=seconds)
    except socket.timeout:
        raise Timeout(target, seconds)
    except OSError as e:
        raise ConnectFailed(target, str(e))
    with sock:
        try:
            write_frame(sock, encode_call(call))
            payload = read_frame(sock, settings.rpc_max_frame)
        except socket.timeout:
            raise Timeout(target, seconds)
        except OSError as e:
            raise ConnectFailed(target, str(e))
    if payload is None:
        raise WireError(f"{target} closed the connection without answering")
    outcome = decode_outcome(payload)
    if isinstance(outcome, Success) and len(outcome.bindings) != call.arity:
        raise WireError(f"{call.operation}/{call.arity} answered with {len(outcome.bindings)} values")
    return outcome


Locator = Callable[[str], ModuleAddress]


def _locator(locator: Any) -> Locator:
    return locator if callable(locator) else locator.locate


class ModuleStub:
    """
    Imported operations of an active module.

    ``stub.response("daniel", PLACEHOLDER)`` locates the module and calls it,
    returning the CallOutcome. The module is located again on every call.
    """

    def __init__(self, module: str, operations: Sequence[Tuple[str, int]], locator: Any,
                 settings: Optional[Settings] = None):
        self.module = module
        self.operations = set(operations)
        self._locate = _locator(locator)
        self._settings = settings

    def call(self, operation: str, *args: Any) -> CallOutcome:
        if (operation, len(args)) not in self.operations:
            raise AttributeError(f"{self.module} does not export {operation}/{len(args)}")
        address = self._locate(self.module)
        return call_remote(address, GoalCall(operation=operation, args=args), settings=self._settings)

    def __getattr__(self, name: str) -> Callable[..., CallOutcome]:
        exported = self.__dict__.get("operations", ())
        if name.startswith("_") or not any(op == name for op, _ in exported):
            raise AttributeError(name)
        return lambda *args: self.call(name, *args)


def import_stub(module: str, operations: Sequence[Tuple[str, int]], locator: Any,
                settings: Optional[Settings] = None) -> ModuleStub:
    return ModuleStub(module, operations, locator, settings)
