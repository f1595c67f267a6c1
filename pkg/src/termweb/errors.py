"""
Exception hierarchy for termweb.

Every failure the toolkit reports is a ``TermwebError``. Each module family
has an intermediate class so callers can catch "anything wrong with a form"
or "anything wrong with the network" without listing concrete errors.
"""

from typing import Any, Optional


class TermwebError(Exception):
    """Root of all termweb errors."""


# --- markup -----------------------------------------------------------------

class MarkupError(TermwebError):
    pass


class AlreadyBound(MarkupError):
    def __init__(self, slot: Any):
        self.slot = slot
        super().__init__(f"slot {slot!r} is already bound")


class UnboundSlot(MarkupError):
    def __init__(self, slot: Any):
        self.slot = slot
        super().__init__(f"slot {slot!r} is unbound")


class MalformedSugar(MarkupError):
    def __init__(self, constructor: str, reason: str):
        self.constructor = constructor
        super().__init__(f"malformed {constructor}: {reason}")


class ExpansionDepthExceeded(MarkupError):
    def __init__(self, constructor: str, depth: int):
        self.constructor = constructor
        self.depth = depth
        super().__init__(f"expansion of {constructor} exceeded depth {depth}")


class ReservedHead(MarkupError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"{name} is a core markup constructor and cannot be redefined")


class XmlSyntax(MarkupError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnknownName(MarkupError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"template has no slot named {name!r}")


# --- terms ------------------------------------------------------------------

class TermSyntax(TermwebError):
    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


# --- forms ------------------------------------------------------------------

class FormError(TermwebError):
    pass


class MalformedInput(FormError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class MissingEnv(FormError):
    def __init__(self, variable: str):
        self.variable = variable
        super().__init__(f"CGI variable {variable} is not set")


class UnknownMethod(FormError):
    def __init__(self, method: str):
        self.method = method
        super().__init__(f"unsupported request method {method!r}")


class Unencodable(FormError):
    def __init__(self, attribute: str, reason: str = "multi-line values cannot go in a query"):
        self.attribute = attribute
        super().__init__(f"{attribute}: {reason}")


# --- urls -------------------------------------------------------------------

class UrlError(TermwebError):
    pass


class NotHttp(UrlError):
    def __init__(self, url: str):
        self.url = url
        super().__init__(f"not an http URL: {url}")


class MalformedUrl(UrlError):
    def __init__(self, url: str, reason: str):
        self.url = url
        super().__init__(f"malformed URL {url!r}: {reason}")


# --- network (http client and active modules) ------------------------------

class HttpError(TermwebError):
    pass


class Timeout(HttpError):
    def __init__(self, target: str, seconds: float):
        self.target = target
        self.seconds = seconds
        super().__init__(f"{target} did not answer within {seconds:g}s")


class ConnectFailed(HttpError):
    def __init__(self, target: str, reason: str):
        self.target = target
        super().__init__(f"cannot connect to {target}: {reason}")


class ProtocolError(HttpError):
    pass


class OverLimit(HttpError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"response exceeds {limit} bytes")


class BadDate(HttpError):
    def __init__(self, value: str):
        self.value = value
        super().__init__(f"not an HTTP date: {value!r}")


class InvalidOption(HttpError):
    pass


class ActmodError(TermwebError):
    pass


class BindFailed(ActmodError):
    pass


class RegistryFrozen(ActmodError):
    def __init__(self, module: str, operation: str):
        self.module = module
        super().__init__(f"{module} is being served; cannot add {operation}")


class PublishFailed(ActmodError):
    def __init__(self, module: str, reason: str):
        self.module = module
        super().__init__(f"cannot publish {module}: {reason}")


class LocateFailed(ActmodError):
    def __init__(self, module: str, reason: str = "address not found"):
        self.module = module
        super().__init__(f"{module}: {reason}")


class WireError(ActmodError):
    pass
