"""
Active-module wire format.

Every message is one frame: a 4-byte big-endian payload length followed by
the payload, a term in canonical text (UTF-8). A client sends one request
frame ``operation(Arg1, ..., ArgN)`` and reads one answer frame:
``success([Arg1, ..., ArgN])``, ``failure`` or ``remote_error("text")``.
"""

import logging
import socket
import struct
from typing import Any, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from termweb.errors import TermSyntax, WireError
from termweb.terms import Atom, Compound, parse_term_text, term_text
from termweb.web.urls import UrlInfo

logger = logging.getLogger(__name__)

HEADER = struct.Struct(">I")
HEADER_SIZE = HEADER.size


class FrameTooLarge(WireError):
    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"frame of {size} bytes exceeds the {limit}-byte limit")


class ModuleAddress(BaseModel):
    """Network address of an active module."""

    model_config = ConfigDict(frozen=True)

    host: str = Field(..., description="Host name or address")
    port: int = Field(..., gt=0, lt=65536, description="TCP port")

    def to_term(self) -> Compound:
        return Compound("addr", [self.host, self.port])

    @classmethod
    def from_term(cls, value: Any) -> "ModuleAddress":
        if not (isinstance(value, Compound) and value.functor == "addr" and value.arity == 2):
            raise WireError(f"not an address term: {term_text(value)}")
        host, port = value.args
        if not isinstance(host, str) or not isinstance(port, int) or isinstance(port, bool):
            raise WireError(f"not an address term: {term_text(value)}")
        try:
            return cls(host=host, port=port)
        except ValueError as e:
            raise WireError(str(e))

    def as_url_info(self) -> UrlInfo:
        return UrlInfo(host=self.host.lower(), port=self.port)

    def __str__(self) -> str:
        return f"{self.host}:{self.port}"


class GoalCall(BaseModel):
    """A request to run ``operation`` on ``args``."""

    model_config = ConfigDict(frozen=True)

    operation: str = Field(..., min_length=1, description="Exported operation name")
    args: Tuple[Any, ...] = Field(default=(), description="Argument values; placeholders are outputs")

    @property
    def arity(self) -> int:
        return len(self.args)

    def to_term(self) -> Union[Atom, Compound]:
        return Compound(self.operation, self.args) if self.args else Atom(self.operation)

    @classmethod
    def from_term(cls, value: Any) -> "GoalCall":
        if isinstance(value, Atom):
            return cls(operation=value.name)
        if isinstance(value, Compound):
            return cls(operation=value.functor, args=value.args)
        raise WireError(f"not a goal: {term_text(value)}")


class Success(BaseModel):
    model_config = ConfigDict(frozen=True)

    bindings: Tuple[Any, ...] = Field(default=(), description="The call's arguments after the call")


class Failure(BaseModel):
    model_config = ConfigDict(frozen=True)


class RemoteError(BaseModel):
    model_config = ConfigDict(frozen=True)

    message: str = Field(..., description="Why the call could not be run")


CallOutcome = Union[Success, Failure, RemoteError]


def outcome_term(outcome: CallOutcome) -> Any:
    if isinstance(outcome, Success):
        return Compound("success", [list(outcome.bindings)])
    if isinstance(outcome, Failure):
        return Atom("failure")
    return Compound("remote_error", [outcome.message])


def outcome_from_term(value: Any) -> CallOutcome:
    if value == Atom("failure"):
        return Failure()
    if isinstance(value, Compound) and value.arity == 1:
        arg = value.args[0]
        if value.functor == "success" and isinstance(arg, list):
            return Success(bindings=tuple(arg))
        if value.functor == "remote_error" and isinstance(arg, str):
            return RemoteError(message=arg)
    raise WireError(f"not a call outcome: {term_text(value)[:200]}")


def _decode_payload(payload: bytes) -> Any:
    try:
        return parse_term_text(payload.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise WireError(f"payload is not UTF-8: {e}")
    except TermSyntax as e:
        raise WireError(f"payload is not a term: {e}")


def encode_call(call: GoalCall) -> bytes:
    return term_text(call.to_term()).encode("utf-8")


def decode_call(payload: bytes) -> GoalCall:
    return GoalCall.from_term(_decode_payload(payload))


def encode_outcome(outcome: CallOutcome) -> bytes:
    return term_text(outcome_term(outcome)).encode("utf-8")


def decode_outcome(payload: bytes) -> CallOutcome:
    return outcome_from_term(_decode_payload(payload))


def frame(payload: bytes) -> bytes:
    return HEADER.pack(len(payload)) + payload


def _recv_exactly(sock: socket.socket, size: int) -> Optional[bytes]:
    chunks = []
    remaining = size
    while remaining:
        chunk = sock.recv(min(remaining, 65536))
        if not chunk:
            if remaining == size:
                return None
            raise WireError(f"connection closed inside a frame ({size - remaining} of {size} bytes)")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket, max_size: int) -> Optional[bytes]:
    """
    Read one frame's payload; None if the peer closed between frames.

    Raises:
        FrameTooLarge: the announced length exceeds ``max_size``
        WireError: the connection closed in the middle of a frame
    """
    header = _recv_exactly(sock, HEADER_SIZE)
    if header is None:
        return None
    (size,) = HEADER.unpack(header)
    if size > max_size:
        raise FrameTooLarge(size, max_size)
    if size == 0:
        return b""
    payload = _recv_exactly(sock, size)
    if payload is None:
        raise WireError(f"connection closed before a {size}-byte payload")
    logger.debug("read frame of %d bytes", size)
    return payload


def write_frame(sock: socket.socket, payload: bytes) -> None:
    sock.sendall(frame(payload))
    logger.debug("wrote frame of %d bytes", len(payload))
