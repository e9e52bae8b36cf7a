"""Tokenizer for the small call-style mini-language shared by symbols and densities.

A spec is one call ``name(arg, ...)`` or a product ``name(...)*name(...)``.
Arguments are decimal literals, except that ``csv`` takes a bare path and
``key=value`` pairs are allowed.  Whitespace is ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


class SpecParseError(ValueError):
    """Malformed spec; ``column`` is the 1-based position of the problem."""

    def __init__(self, message, text, column):
        super().__init__("%s at column %d in %r" % (message, column, text))
        self.text = text
        self.column = column


@dataclass
class Call:
    name: str
    args: list = field(default_factory=list)
    kwargs: dict = field(default_factory=dict)
    column: int = 1


def _skip_ws(text, i):
    while i < len(text) and text[i].isspace():
        i += 1
    return i


def _parse_call(text, i, raw_args):
    i = _skip_ws(text, i)
    m = _NAME.match(text, i)
    if not m:
        raise SpecParseError("expected a form name", text, i + 1)
    call = Call(m.group(0).lower(), column=i + 1)
    i = _skip_ws(text, m.end())
    if i >= len(text) or text[i] != "(":
        raise SpecParseError("expected '('", text, i + 1)
    i += 1
    raw = call.name in raw_args
    while True:
        i = _skip_ws(text, i)
        if i >= len(text):
            raise SpecParseError("unterminated argument list", text, i + 1)
        if text[i] == ")" and not call.args and not call.kwargs:
            return call, i + 1
        start = i
        while i < len(text) and text[i] not in ",)":
            i += 1
        if i >= len(text):
            raise SpecParseError("unterminated argument list", text, i + 1)
        token = text[start:i].strip()
        if not token:
            raise SpecParseError("empty argument", text, start + 1)
        key = None
        if "=" in token:
            key, token = (s.strip() for s in token.split("=", 1))
            if not _NAME.fullmatch(key):
                raise SpecParseError("bad keyword %r" % key, text, start + 1)
        if raw and key is None and not call.args:
            value = token
        else:
            if not _NUMBER.match(token):
                if token.lower() in ("inf", "+inf"):
                    value = float("inf")
                else:
                    raise SpecParseError("expected a decimal literal, got %r" % token, text, start + 1)
            else:
                value = float(token)
        if key is None:
            if call.kwargs:
                raise SpecParseError("positional argument after keyword", text, start + 1)
            call.args.append(value)
        else:
            call.kwargs[key] = value
        if text[i] == ")":
            return call, i + 1
        i += 1


def parse_product(text: str, raw_args=("csv",)) -> list:
    """Parse ``name(...)`` or ``name(...)*name(...)`` into a list of calls."""
    if not isinstance(text, str):
        raise TypeError("spec must be a string")
    calls = []
    i = 0
    while True:
        call, i = _parse_call(text, i, raw_args)
        calls.append(call)
        i = _skip_ws(text, i)
        if i >= len(text):
            return calls
        if text[i] != "*":
            raise SpecParseError("unexpected character %r" % text[i], text, i + 1)
        i += 1


def expect_args(call: Call, text: str, n_min: int, n_max: int, kw=()):
    if not n_min <= len(call.args) <= n_max:
        want = str(n_min) if n_min == n_max else "%d..%d" % (n_min, n_max)
        raise SpecParseError(
            "%s() takes %s arguments, got %d" % (call.name, want, len(call.args)), text, call.column
        )
    extra = set(call.kwargs) - set(kw)
    if extra:
        raise SpecParseError("%s() got unknown keyword %s" % (call.name, sorted(extra)[0]), text, call.column)
