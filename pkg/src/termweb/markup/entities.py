"""Character escaping shared by the markup codec and the sugar table."""

import re

_CORE = {"amp": "&", "lt": "<", "gt": ">", "quot": '"'}
_REFERENCE = re.compile(r"&(#[0-9]+|#[xX][0-9a-fA-F]+|[A-Za-z][A-Za-z0-9]*);")


def escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def escape_attr(value: str) -> str:
    return value.replace("&", "&amp;").replace('"', "&quot;")


def escape_all(text: str) -> str:
    """Quote every markup-significant character, as verbatim text needs."""
    return escape_text(text).replace('"', "&quot;")


def _decode_one(match: re.Match) -> str:
    ref = match.group(1)
    if ref[0] != "#":
        return _CORE.get(ref, match.group(0))
    try:
        code = int(ref[2:], 16) if ref[1] in "xX" else int(ref[1:])
    except ValueError:
        return match.group(0)
    if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
        return match.group(0)
    return chr(code)


def decode_entities(text: str) -> str:
    """Decode the four core entities and numeric references; others stay literal."""
    if "&" not in text:
        return text
    return _REFERENCE.sub(_decode_one, text)
