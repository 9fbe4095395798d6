"""Line grammar shared by transcripts and the prover/verifier wire protocol.

Every message is one ASCII line ``VERB arg arg ...\\n`` of at most 64 KiB.
Numeric arguments are unsigned decimals without leading zeros.
"""

from __future__ import annotations

import re
from typing import NamedTuple, Union

MAX_LINE = 64 * 1024
PROTOCOL_VERSION = "v1"

Arg = Union[int, str]

_TOKEN = re.compile(r"[a-z][a-z0-9-]*\Z")
_HEX64 = re.compile(r"[0-9a-f]{64}\Z")


class DecodeError(ValueError):
    pass


class Message(NamedTuple):
    verb: str
    args: tuple[Arg, ...] = ()

    def __str__(self) -> str:
        return " ".join([self.verb, *map(str, self.args)])


def _decimal(tok: str) -> int:
    if not (tok.isascii() and tok.isdigit()) or (len(tok) > 1 and tok[0] == "0"):
        raise DecodeError(f"non-decimal argument {tok!r}")
    return int(tok)


def _token(tok: str) -> str:
    if not _TOKEN.match(tok):
        raise DecodeError(f"bad token {tok!r}")
    return tok


def _hexdigest(tok: str) -> str:
    if not _HEX64.match(tok):
        raise DecodeError(f"bad digest {tok!r}")
    return tok


def _verdict(tok: str) -> str:
    if tok not in ("accept", "reject"):
        raise DecodeError(f"bad verdict {tok!r}")
    return tok


# verb -> (fixed argument parsers, variadic decimal tail minimum or None)
_SCHEMA = {
    "HELLO": ((_token, _hexdigest), None),
    "EVAL": ((_decimal,), None),
    "CLAIM": ((_decimal,), None),
    "ROUND": ((_decimal, _decimal), 2),
    "CHAL": ((_decimal, _decimal, _decimal), None),
    "FINAL": ((_decimal, _decimal), None),
    "VERDICT": ((_verdict, _token), None),
    "ERROR": ((_token,), None),
}

VERBS = tuple(_SCHEMA)


def _check(msg: Message) -> None:
    if msg.verb not in _SCHEMA:
        raise DecodeError(f"unknown verb {msg.verb!r}")
    fixed, tail = _SCHEMA[msg.verb]
    n = len(msg.args)
    if n < len(fixed) or (tail is None and n != len(fixed)) or (tail is not None and n - len(fixed) < tail):
        raise DecodeError(f"wrong arity for {msg.verb}: {n}")
    for parse, arg in zip(fixed, msg.args):
        parse(str(arg))
    for arg in msg.args[len(fixed):]:
        _decimal(str(arg))


def encode(msg: Message) -> bytes:
    _check(msg)
    line = (str(msg) + "\n").encode("ascii")
    if len(line) > MAX_LINE:
        raise DecodeError("oversize line")
    return line


def decode(line: bytes) -> Message:
    if len(line) > MAX_LINE:
        raise DecodeError("oversize line")
    if not line.endswith(b"\n"):
        raise DecodeError("unterminated line")
    body = line[:-1]
    if b"\n" in body or b"\r" in body:
        raise DecodeError("embedded line break")
    try:
        text = body.decode("ascii")
    except UnicodeDecodeError:
        raise DecodeError("non-ascii line") from None
    tokens = text.split(" ")
    if not tokens[0] or any(not t for t in tokens):
        raise DecodeError("empty token")
    verb, raw = tokens[0], tokens[1:]
    if verb not in _SCHEMA:
        raise DecodeError(f"unknown verb {verb!r}")
    fixed, tail = _SCHEMA[verb]
    n = len(raw)
    if n < len(fixed) or (tail is None and n != len(fixed)) or (tail is not None and n - len(fixed) < tail):
        raise DecodeError(f"wrong arity for {verb}: {n}")
    args = [parse(tok) for parse, tok in zip(fixed, raw)]
    args.extend(_decimal(tok) for tok in raw[len(fixed):])
    return Message(verb, tuple(args))
