"""Running a session across a byte stream.

Conversation (C = verifier client, S = prover server)::

    C: HELLO v1 <digest>        S: HELLO v1 <digest>
    C: EVAL <x>                 S: CLAIM <v>
                                S: ROUND 0 1 <v0> .. <v_{eta-1}>
    C: CHAL 0 1 <b>             S: ROUND 0 2 ...
    ...
    C: CHAL 0 r <b>
    C: FINAL 0 <ref>            S: ROUND 1 1 ...        (if more experiments)
    ...
    C: VERDICT <accept|reject> <reason>                 (S closes)

A client that rejects sends VERDICT straight away. Any malformed or
out-of-sequence line makes the server answer ``ERROR <reason>`` and close.
"""

from __future__ import annotations

import socket
import socketserver
import threading
from collections import deque
from typing import BinaryIO, Callable

from vpe.lookup import LookupTable
from vpe.messages import MAX_LINE, PROTOCOL_VERSION, DecodeError, Message, decode, encode
from vpe.ops import OpCount
from vpe.params import ProtocolParams
from vpe.poly import Polynomial
from vpe.protocol import (
    Prover,
    ProtocolViolation,
    SessionError,
    Transcript,
    Verdict,
    Verifier,
    drive,
    make_prover,
)

__all__ = [
    "encode",
    "decode",
    "Message",
    "ProverSession",
    "TransportError",
    "RemoteError",
    "connect_verifier",
    "serve_prover",
    "start_server",
]

IO_TIMEOUT = 30.0


class TransportError(SessionError):
    pass


class RemoteError(ProtocolViolation):
    """The peer answered with an ERROR line."""

    def __init__(self, reason: str) -> None:
        super().__init__(f"peer reported error: {reason}")
        self.reason = reason


def _out(verb: str, *args) -> bytes:
    return encode(Message(verb, args))


class ProverSession:
    """Prover side of one connection as a line-in, lines-out state machine."""

    def __init__(self, params: ProtocolParams, prover_factory: Callable[[], Prover]) -> None:
        self.params = params
        self.digest = params.digest()
        self._factory = prover_factory
        self.prover: Prover | None = None
        self.state = "hello"
        self.closed = False
        self.experiment = 0
        self.level = 0

    def _fail(self, reason: str) -> list[bytes]:
        self.closed = True
        self.state = "closed"
        return [_out("ERROR", reason)]

    def handle(self, line: bytes) -> list[bytes]:
        if self.closed:
            return []
        try:
            msg = decode(line)
        except DecodeError as exc:
            return self._fail("oversize" if "oversize" in str(exc) else "syntax")
        try:
            return self._dispatch(msg)
        except ProtocolViolation:
            return self._fail("sequence")
        except Exception:  # never let a prover fault escape the session
            return self._fail("internal")

    def _dispatch(self, msg: Message) -> list[bytes]:
        verb, args = msg
        prm = self.params
        if verb == "ERROR":
            self.closed, self.state = True, "closed"
            return []
        if self.state == "hello":
            if verb != "HELLO":
                return self._fail("handshake")
            if args[0] != PROTOCOL_VERSION:
                return self._fail("version")
            if args[1] != self.digest:
                return self._fail("digest")
            self.state = "eval"
            return [_out("HELLO", PROTOCOL_VERSION, self.digest)]
        if verb == "VERDICT" and self.state in ("chal", "final", "verdict"):
            self.closed, self.state = True, "closed"
            return []
        if self.state == "eval":
            if verb != "EVAL":
                return self._fail("sequence")
            (x,) = args
            if x >= prm.p:
                return self._fail("range")
            self.prover = self._factory()
            claim = self.prover.start(x)
            self.experiment, self.level = 0, 1
            self.state = "chal"
            return [_out("CLAIM", claim), self._round()]
        if self.state == "chal":
            if verb != "CHAL" or tuple(args[:2]) != (self.experiment, self.level):
                return self._fail("sequence")
            b = args[2]
            if b >= prm.c_eta:
                return self._fail("range")
            self.prover.accept_challenge(b)
            if self.level < self.prover.rounds:
                self.level += 1
                return [self._round()]
            self.state = "final"
            return []
        if self.state == "final":
            if verb != "FINAL" or args[0] != self.experiment:
                return self._fail("sequence")
            if args[1] >= prm.p:
                return self._fail("range")
            self.prover.restart()
            if self.experiment + 1 < prm.m:
                self.experiment, self.level = self.experiment + 1, 1
                self.state = "chal"
                return [self._round()]
            self.state = "verdict"
            return []
        return self._fail("sequence")

    def _round(self) -> bytes:
        return _out("ROUND", self.experiment, self.level, *self.prover.round())


def serve_stream(session: ProverSession, rfile: BinaryIO, wfile: BinaryIO) -> None:
    """Pump lines between a stream pair and a session until it closes."""
    while not session.closed:
        try:
            line = rfile.readline(MAX_LINE + 1)
        except (OSError, ValueError):
            return
        if not line:
            return
        if len(line) > MAX_LINE or not line.endswith(b"\n"):
            replies = session._fail("oversize" if len(line) > MAX_LINE else "syntax")
        else:
            replies = session.handle(line)
        try:
            for reply in replies:
                wfile.write(reply)
            wfile.flush()
        except (OSError, ValueError):
            return


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        self.request.settimeout(self.server.io_timeout)
        self.request.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        serve_stream(self.server.session_factory(), self.rfile, self.wfile)


class ProverServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, session_factory: Callable[[], ProverSession], io_timeout: float = IO_TIMEOUT):
        self.session_factory = session_factory
        self.io_timeout = io_timeout
        super().__init__(address, _Handler)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint must be host:port, got {endpoint!r}")
    return host or "127.0.0.1", int(port)


def session_factory(
    f: Polynomial,
    params: ProtocolParams,
    strategy: str = "honest",
    delta: int = 1,
    seed: int | None = None,
) -> Callable[[], ProverSession]:
    def factory() -> ProverSession:
        return ProverSession(params, lambda: make_prover(strategy, f, params, delta=delta, seed=seed))

    return factory


def start_server(f: Polynomial, params: ProtocolParams, endpoint: str = "127.0.0.1:0", *,
                 strategy: str = "honest", delta: int = 1, seed: int | None = None) -> ProverServer:
    """Bind and serve in a background thread; call ``shutdown()`` to stop."""
    server = ProverServer(parse_endpoint(endpoint), session_factory(f, params, strategy, delta, seed))
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server


def serve_prover(f: Polynomial, params: ProtocolParams, endpoint: str, *,
                 strategy: str = "honest", delta: int = 1, seed: int | None = None) -> None:
    with ProverServer(parse_endpoint(endpoint), session_factory(f, params, strategy, delta, seed)) as server:
        server.serve_forever()


class StreamChannel:
    """Client-side line channel over a pair of binary streams."""

    def __init__(self, rfile: BinaryIO, wfile: BinaryIO, closer: Callable[[], None] | None = None) -> None:
        self.rfile = rfile
        self.wfile = wfile
        self._closer = closer

    def send(self, msg: Message) -> None:
        try:
            self.wfile.write(encode(msg))
            self.wfile.flush()
        except (OSError, ValueError) as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def recv(self) -> Message:
        try:
            line = self.rfile.readline(MAX_LINE + 1)
        except (OSError, ValueError) as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        if not line:
            raise TransportError("connection closed by peer")
        if not line.endswith(b"\n"):
            if len(line) > MAX_LINE:
                raise ProtocolViolation("oversize line from peer")
            raise TransportError("connection closed mid-line")
        try:
            return decode(line)
        except DecodeError as exc:
            raise ProtocolViolation(f"malformed line from peer: {exc}") from exc

    def close(self) -> None:
        if self._closer is not None:
            self._closer()


def connect(endpoint: str, timeout: float = IO_TIMEOUT) -> StreamChannel:
    try:
        sock = socket.create_connection(parse_endpoint(endpoint), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"cannot connect to {endpoint}: {exc}") from exc
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    rfile, wfile = sock.makefile("rb"), sock.makefile("wb")

    def closer() -> None:
        for fh in (rfile, wfile):
            try:
                fh.close()
            except OSError:
                pass
        sock.close()

    return StreamChannel(rfile, wfile, closer)


class LoopbackChannel:
    """In-memory channel straight into a :class:`ProverSession`."""

    def __init__(self, session: ProverSession) -> None:
        self.session = session
        self._inbox: deque[bytes] = deque()
        self.wire_log: list[bytes] = []

    def send(self, msg: Message) -> None:
        if self.session.closed:
            raise TransportError("connection closed by peer")
        line = encode(msg)
        self.wire_log.append(line)
        self._inbox.extend(self.session.handle(line))

    def recv(self) -> Message:
        if not self._inbox:
            raise TransportError("connection closed by peer" if self.session.closed else "peer is silent")
        line = self._inbox.popleft()
        self.wire_log.append(line)
        return decode(line)

    def close(self) -> None:
        pass


class RemoteLink:
    """Verifier's view of a prover on the other end of a channel."""

    def __init__(self, channel, params: ProtocolParams) -> None:
        self.channel = channel
        self.params = params

    def _expect(self, verb: str) -> tuple:
        msg = self.channel.recv()
        if msg.verb == "ERROR":
            raise RemoteError(msg.args[0])
        if msg.verb != verb:
            raise ProtocolViolation(f"expected {verb}, got {msg.verb}")
        return msg.args

    def handshake(self) -> None:
        digest = self.params.digest()
        self.channel.send(Message("HELLO", (PROTOCOL_VERSION, digest)))
        version, theirs = self._expect("HELLO")
        if version != PROTOCOL_VERSION or theirs != digest:
            raise ProtocolViolation("prover answered the handshake with different parameters")

    def claim(self, x: int) -> int:
        self.channel.send(Message("EVAL", (x,)))
        (v,) = self._expect("CLAIM")
        return v

    def round(self, experiment: int, level: int) -> list[int]:
        args = self._expect("ROUND")
        if tuple(args[:2]) != (experiment, level):
            raise ProtocolViolation(f"ROUND for {args[:2]}, expected {(experiment, level)}")
        return list(args[2:])

    def challenge(self, experiment: int, level: int, b: int) -> None:
        self.channel.send(Message("CHAL", (experiment, level, b)))

    def final(self, experiment: int, value: int) -> None:
        self.channel.send(Message("FINAL", (experiment, value)))

    def close(self, verdict: Verdict) -> None:
        try:
            self.channel.send(Message("VERDICT", ("accept" if verdict.accepted else "reject", verdict.reason)))
        except TransportError:
            pass
        self.channel.close()


def connect_verifier(
    params: ProtocolParams,
    table: LookupTable,
    x: int,
    endpoint,
    seed: int | None = None,
    *,
    ops: OpCount | None = None,
) -> tuple[Verdict, Transcript]:
    """Verify ``f(x)`` against a remote prover.

    ``endpoint`` is ``"host:port"`` or an already-open channel. Transport and
    protocol failures raise :class:`SessionError`; rejection is a verdict.
    """
    verifier = Verifier(params, table, x, seed=seed, ops=ops)
    channel = connect(endpoint) if isinstance(endpoint, str) else endpoint
    link = RemoteLink(channel, params)
    try:
        link.handshake()
        return drive(verifier, link)
    except SessionError:
        channel.close()
        raise
