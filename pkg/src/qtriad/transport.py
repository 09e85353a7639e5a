"""Classical-channel session harness.

Three protocol roles exchange length-prefixed JSON frames either over
in-process queues or TCP sockets, in a star topology centered on the
facilitator (Alice and Bob never talk directly). Transcripts are a pure
function of (protocol, params, seed): the quantum correlations are realized
through the shared seeded round plan, standing in for the shared entangled
states, while the message layer carries exactly the protocol-visible flow
(basis announcements, sift results, outcome announcements on request, the
flip rule and mode reveal). Role views never expose another party's data.

Wire format (schema/wire-v1.md): 4-byte big-endian length prefix followed
by one UTF-8 JSON object with sorted keys.
"""

from __future__ import annotations

import json
import queue
import socket
import struct
import threading
from dataclasses import dataclass

import numpy as np

from . import protocols
from .errors import FrameError, HandshakeError, TransportError

WIRE_VERSION = "wire-v1"
MAX_FRAME_BYTES = 64 * 1024
DEFAULT_TIMEOUT = 10.0

MSG_SESSION_START = "SessionStart"
MSG_SESSION_END = "SessionEnd"
MSG_BASIS_ANNOUNCE = "BasisAnnounce"
MSG_BASIS_INSTRUCT = "BasisInstruct"
MSG_ANNOUNCE_REQUEST = "AnnounceRequest"
MSG_OUTCOME_ANNOUNCE = "OutcomeAnnounce"
MSG_MODE_REVEAL = "ModeReveal"
MSG_FLIP_RULE = "FlipRule"

MSG_TYPES = frozenset(
    {
        MSG_SESSION_START,
        MSG_SESSION_END,
        MSG_BASIS_ANNOUNCE,
        MSG_BASIS_INSTRUCT,
        MSG_ANNOUNCE_REQUEST,
        MSG_OUTCOME_ANNOUNCE,
        MSG_MODE_REVEAL,
        MSG_FLIP_RULE,
    }
)


@dataclass(frozen=True)
class WireMessage:
    """One classical-channel message; every frame carries the protocol
    version and session id, and round ids are monotone per sender."""

    msg_type: str
    sender: str
    session_id: str
    round_id: int
    payload: dict
    version: str = WIRE_VERSION


def encode_message(msg: WireMessage) -> bytes:
    """Frame a message: 4-byte big-endian length + canonical JSON."""
    if msg.msg_type not in MSG_TYPES:
        raise FrameError(f"unknown msg_type {msg.msg_type!r}")
    body = json.dumps(
        {
            "v": msg.version,
            "type": msg.msg_type,
            "sender": msg.sender,
            "session": msg.session_id,
            "round": msg.round_id,
            "payload": msg.payload,
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    if len(body) > MAX_FRAME_BYTES:
        raise FrameError(f"frame of {len(body)} bytes exceeds {MAX_FRAME_BYTES}")
    return struct.pack(">I", len(body)) + body


def decode_message(frame: bytes) -> WireMessage:
    """Inverse of :func:`encode_message` for one complete frame."""
    if len(frame) < 4:
        raise FrameError("truncated frame: missing length prefix")
    (length,) = struct.unpack(">I", frame[:4])
    if length > MAX_FRAME_BYTES:
        raise FrameError(f"frame of {length} bytes exceeds {MAX_FRAME_BYTES}")
    body = frame[4:]
    if len(body) != length:
        raise FrameError(f"truncated frame: expected {length} bytes, got {len(body)}")
    return _parse_body(body)


def _parse_body(body: bytes) -> WireMessage:
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"malformed frame: {exc}") from exc
    try:
        msg = WireMessage(
            msg_type=obj["type"],
            sender=obj["sender"],
            session_id=obj["session"],
            round_id=int(obj["round"]),
            payload=obj["payload"],
            version=obj["v"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FrameError(f"malformed frame fields: {exc}") from exc
    if msg.msg_type not in MSG_TYPES:
        raise FrameError(f"unsupported msg_type {msg.msg_type!r}")
    return msg


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------


class Channel:
    """FIFO, loss-free bidirectional message channel endpoint."""

    def send(self, msg: WireMessage) -> None:
        raise NotImplementedError

    def recv(self, timeout: float = DEFAULT_TIMEOUT) -> WireMessage:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError


class InProcessChannel(Channel):
    _CLOSED = object()

    def __init__(self, inbox: queue.Queue, outbox: queue.Queue):
        self._inbox = inbox
        self._outbox = outbox

    def send(self, msg: WireMessage) -> None:
        # Round-trip through the frame codec so both transports exercise it.
        self._outbox.put(encode_message(msg))

    def recv(self, timeout: float = DEFAULT_TIMEOUT) -> WireMessage:
        try:
            item = self._inbox.get(timeout=timeout)
        except queue.Empty:
            raise TransportError(f"receive timed out after {timeout}s") from None
        if item is self._CLOSED:
            raise TransportError("channel closed by peer")
        return decode_message(item)

    def close(self) -> None:
        self._outbox.put(self._CLOSED)


def in_process_pair() -> tuple[InProcessChannel, InProcessChannel]:
    a_to_b: queue.Queue = queue.Queue()
    b_to_a: queue.Queue = queue.Queue()
    return InProcessChannel(b_to_a, a_to_b), InProcessChannel(a_to_b, b_to_a)


class SocketChannel(Channel):
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._closed = False

    def _recv_exact(self, n: int, timeout: float) -> bytes:
        self._sock.settimeout(timeout)
        chunks = []
        remaining = n
        while remaining:
            try:
                chunk = self._sock.recv(remaining)
            except socket.timeout:
                raise TransportError(f"receive timed out after {timeout}s") from None
            except OSError as exc:
                raise TransportError(f"socket error: {exc}") from exc
            if not chunk:
                raise TransportError("connection closed by peer")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def send(self, msg: WireMessage) -> None:
        if self._closed:
            raise TransportError("channel is closed")
        try:
            self._sock.sendall(encode_message(msg))
        except OSError as exc:
            raise TransportError(f"socket error: {exc}") from exc

    def recv(self, timeout: float = DEFAULT_TIMEOUT) -> WireMessage:
        header = self._recv_exact(4, timeout)
        (length,) = struct.unpack(">I", header)
        if length > MAX_FRAME_BYTES:
            raise FrameError(f"frame of {length} bytes exceeds {MAX_FRAME_BYTES}")
        return _parse_body(self._recv_exact(length, timeout))

    def close(self) -> None:
        self._closed = True
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


# ---------------------------------------------------------------------------
# Role views of the shared round plan
# ---------------------------------------------------------------------------


def _session_id(protocol: str, params: dict) -> str:
    return f"{protocol}-m{params['m']}-s{params['seed']}"


def _build_plan(protocol: str, params: dict) -> dict[str, np.ndarray]:
    if protocol == protocols.PROTOCOL_FACILITATED:
        return protocols.facilitated_plan(
            int(params["m"]),
            float(params["lambda"]),
            params["policy"],
            protocols.parse_cheat(params["cheat"]),
            int(params["seed"]),
        )
    if protocol == protocols.PROTOCOL_QSS:
        return protocols.qss_plan(int(params["m"]), int(params["seed"]))
    raise TransportError(f"unknown protocol {protocol!r}")


def _role_view(role: str, plan: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """The columns one party may read: its own bases and recorded outcomes."""
    if role not in ("alice", "bob"):
        raise ValueError(role)
    return {"basis": plan[f"{role}_basis"], "outcome": plan[f"{role}_outcome"]}


# ---------------------------------------------------------------------------
# Spoke state machines (Alice / Bob)
# ---------------------------------------------------------------------------


def run_spoke(
    channel: Channel,
    role: str,
    timeout: float = DEFAULT_TIMEOUT,
    fail_after_round: int | None = None,
) -> None:
    """Run one non-facilitator party until SessionEnd.

    Spokes are purely reactive: they reply to AnnounceRequest messages
    (payload ``what`` selects basis or outcome) and acknowledge nothing
    else. ``fail_after_round`` is a fault-injection hook: the spoke drops
    its channel once it sees a message for that round, for disconnect
    testing.
    """
    if role not in ("alice", "bob"):
        raise ValueError(f"spoke role must be alice or bob, not {role!r}")
    channel.send(WireMessage(MSG_SESSION_START, role, "?", 0, {"role": role}))
    start = channel.recv(timeout)
    if start.version != WIRE_VERSION:
        raise HandshakeError(f"version mismatch: peer {start.version}, local {WIRE_VERSION}")
    if start.msg_type != MSG_SESSION_START:
        raise HandshakeError(f"expected SessionStart, got {start.msg_type}")
    protocol = start.payload["protocol"]
    params = start.payload["params"]
    session = start.session_id
    view = _role_view(role, _build_plan(protocol, params))

    while True:
        msg = channel.recv(timeout)
        if msg.version != WIRE_VERSION:
            raise HandshakeError(f"version mismatch mid-session: {msg.version}")
        if fail_after_round is not None and msg.round_id >= fail_after_round:
            channel.close()
            return
        if msg.msg_type == MSG_BASIS_INSTRUCT or msg.msg_type in (MSG_FLIP_RULE, MSG_MODE_REVEAL):
            continue
        if msg.msg_type == MSG_ANNOUNCE_REQUEST:
            if msg.payload.get("what") == "basis":
                reply = WireMessage(
                    MSG_BASIS_ANNOUNCE, role, session, msg.round_id,
                    {"basis": str(view["basis"][msg.round_id])},
                )
            else:
                reply = WireMessage(
                    MSG_OUTCOME_ANNOUNCE, role, session, msg.round_id,
                    {"outcome": int(view["outcome"][msg.round_id])},
                )
            channel.send(reply)
            continue
        if msg.msg_type == MSG_SESSION_END:
            return
        raise TransportError(f"unexpected message {msg.msg_type}")


# ---------------------------------------------------------------------------
# Hub state machine (Charlie)
# ---------------------------------------------------------------------------


class _Hub:
    def __init__(self, protocol: str, params: dict, timeout: float):
        self.protocol = protocol
        self.params = dict(params)
        self.timeout = timeout
        self.session = _session_id(protocol, self.params)
        self.plan = _build_plan(protocol, self.params)
        self.m = int(self.params["m"])
        self.channels: dict[str, Channel] = {}

    def _send(self, role: str, msg_type: str, round_id: int, payload: dict) -> None:
        self.channels[role].send(WireMessage(msg_type, "charlie", self.session, round_id, payload))

    def _recv(self, role: str, expected_type: str, round_id: int) -> WireMessage:
        msg = self.channels[role].recv(self.timeout)
        if msg.version != WIRE_VERSION:
            raise HandshakeError(f"version mismatch from {role}: {msg.version}")
        if msg.msg_type != expected_type or msg.round_id != round_id:
            raise TransportError(
                f"expected {expected_type}/{round_id} from {role}, got {msg.msg_type}/{msg.round_id}"
            )
        return msg

    def handshake(self, first: Channel, second: Channel) -> None:
        """Register both spokes by their hello messages, then send params."""
        for chan in (first, second):
            hello = chan.recv(self.timeout)
            if hello.version != WIRE_VERSION:
                raise HandshakeError(f"version mismatch: peer sent {hello.version}")
            if hello.msg_type != MSG_SESSION_START:
                raise HandshakeError(f"expected SessionStart, got {hello.msg_type}")
            role = hello.payload.get("role")
            if role not in ("alice", "bob") or role in self.channels:
                raise HandshakeError(f"invalid or duplicate role {role!r}")
            self.channels[role] = chan
        payload = {"protocol": self.protocol, "params": self.params}
        for role in ("alice", "bob"):
            self._send(role, MSG_SESSION_START, 0, payload)

    def run_rounds(self) -> int:
        """Drive all rounds; returns the number of completed rounds."""
        plan = self.plan
        facilitated = self.protocol == protocols.PROTOCOL_FACILITATED
        basis_announced = not facilitated or self.params.get("policy") == protocols.POLICY_SIFT_DISCARD
        for r in range(self.m):
            try:
                if basis_announced:
                    for role in ("alice", "bob"):
                        self._send(role, MSG_ANNOUNCE_REQUEST, r, {"what": "basis"})
                    for role, col in (("alice", "alice_basis"), ("bob", "bob_basis")):
                        msg = self._recv(role, MSG_BASIS_ANNOUNCE, r)
                        if msg.payload["basis"] != str(plan[col][r]):
                            raise TransportError(f"{role} announced a basis outside the shared plan")
                accepted = bool(plan["accepted"][r])
                if facilitated:
                    instruct = {"basis": str(plan["alice_basis"][r]) if accepted else None, "accepted": accepted}
                else:
                    bases = str(plan["alice_basis"][r]) + str(plan["bob_basis"][r]) + str(plan["charlie_basis"][r])
                    instruct = {"basis": None, "accepted": accepted, "bases": bases}
                for role in ("alice", "bob"):
                    self._send(role, MSG_BASIS_INSTRUCT, r, instruct)
                if facilitated:
                    control = plan["mode"][r] == protocols.MODE_CONTROL
                    if accepted and control:
                        for role, col in (("alice", "alice_outcome"), ("bob", "bob_outcome")):
                            self._send(role, MSG_ANNOUNCE_REQUEST, r, {"what": "outcome"})
                            msg = self._recv(role, MSG_OUTCOME_ANNOUNCE, r)
                            if int(msg.payload["outcome"]) != int(plan[col][r]):
                                raise TransportError(f"{role} announced an outcome outside the shared plan")
                else:
                    if accepted:
                        self._send("bob", MSG_ANNOUNCE_REQUEST, r, {"what": "outcome"})
                        msg = self._recv("bob", MSG_OUTCOME_ANNOUNCE, r)
                        if int(msg.payload["outcome"]) != int(plan["bob_outcome"][r]):
                            raise TransportError("bob announced an outcome outside the shared plan")
            except TransportError:
                return r
        return self.m

    def finish(self, completed: int) -> protocols.SessionTranscript:
        transcript = self._transcript(completed)
        payload_end: dict = {"status": "ok" if completed == self.m else "aborted"}
        if self.protocol == protocols.PROTOCOL_FACILITATED and completed == self.m:
            report = protocols.detect_cheating(transcript)
            payload_end["verdict"] = report.verdict
            if report.verdict == "Honest":
                modes = "".join("m" if v == protocols.MODE_MESSAGE else "c" for v in self.plan["mode"])
                self._broadcast(MSG_FLIP_RULE, self.m, {"party": "bob", "flip_basis": "Z"})
                self._broadcast(MSG_MODE_REVEAL, self.m, {"modes": modes})
        self._broadcast(MSG_SESSION_END, self.m, payload_end)
        return transcript

    def _broadcast(self, msg_type: str, round_id: int, payload: dict) -> None:
        for role in ("alice", "bob"):
            try:
                self._send(role, msg_type, round_id, payload)
            except TransportError:
                continue

    def _transcript(self, completed: int) -> protocols.SessionTranscript:
        plan = self.plan
        if self.protocol == protocols.PROTOCOL_FACILITATED:
            keys = ("round_id", "mode", "charlie_outcome", "alice_basis", "bob_basis", "accepted", "alice_outcome", "bob_outcome")
        else:
            keys = ("round_id", "alice_basis", "bob_basis", "charlie_basis", "accepted", "alice_outcome", "bob_outcome", "charlie_sign")
        cols = {k: plan[k][:completed] for k in keys}
        return protocols.SessionTranscript(
            self.protocol, self._transcript_params(), cols, complete=completed == self.m
        )

    def _transcript_params(self) -> dict:
        return dict(self.params)


def run_hub(
    channel_alice_side: Channel,
    channel_bob_side: Channel,
    protocol: str,
    params: dict,
    timeout: float = DEFAULT_TIMEOUT,
) -> protocols.SessionTranscript:
    """Run the facilitator over two already-open channels (roles are
    discovered from the hello messages, not the argument order)."""
    hub = _Hub(protocol, params, timeout)
    hub.handshake(channel_alice_side, channel_bob_side)
    completed = hub.run_rounds()
    return hub.finish(completed)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


def _spoke_thread(target_args: tuple, errors: list) -> threading.Thread:
    channel, role, timeout, fail_after = target_args

    def runner() -> None:
        try:
            run_spoke(channel, role, timeout, fail_after)
        except TransportError as exc:
            errors.append(exc)

    t = threading.Thread(target=runner, name=f"spoke-{role}", daemon=True)
    t.start()
    return t


def run_roles(
    protocol: str,
    params: dict,
    transport: str = "in-process",
    host: str = "127.0.0.1",
    port: int = 0,
    timeout: float = DEFAULT_TIMEOUT,
    fail_after: dict[str, int] | None = None,
) -> protocols.SessionTranscript:
    """Run all three roles to completion and return the hub's transcript.

    ``transport`` is "in-process" (queue channels) or "socket" (loopback
    TCP, all roles in this process but speaking the full wire protocol).
    Transcripts are bit-identical across transports for equal seeds.
    """
    fail_after = fail_after or {}
    params = _normalized_params(protocol, params)
    spoke_errors: list = []
    if transport == "in-process":
        hub_a, spoke_a = in_process_pair()
        hub_b, spoke_b = in_process_pair()
        threads = [
            _spoke_thread((spoke_a, "alice", timeout, fail_after.get("alice")), spoke_errors),
            _spoke_thread((spoke_b, "bob", timeout, fail_after.get("bob")), spoke_errors),
        ]
        transcript = run_hub(hub_a, hub_b, protocol, params, timeout)
    elif transport == "socket":
        listener = socket.create_server((host, port))
        listener.settimeout(timeout)
        bound_port = listener.getsockname()[1]

        def connect(role: str) -> SocketChannel:
            return SocketChannel(socket.create_connection((host, bound_port), timeout=timeout))

        chans: dict[str, SocketChannel] = {}
        threads = []
        for role in ("alice", "bob"):
            chan = connect(role)
            chans[role] = chan
            threads.append(_spoke_thread((chan, role, timeout, fail_after.get(role)), spoke_errors))
        try:
            first = SocketChannel(listener.accept()[0])
            second = SocketChannel(listener.accept()[0])
        except socket.timeout:
            raise TransportError("no spoke connected before timeout") from None
        finally:
            listener.close()
        transcript = run_hub(first, second, protocol, params, timeout)
    else:
        raise ValueError(f"unknown transport {transport!r}")
    for t in threads:
        t.join(timeout)
    return transcript


def _normalized_params(protocol: str, params: dict) -> dict:
    """Fill defaults so both ends derive the identical plan."""
    out = dict(params)
    out["m"] = int(out["m"])
    out["seed"] = int(out.get("seed", 0))
    if protocol == protocols.PROTOCOL_FACILITATED:
        out["lambda"] = float(out.get("lambda", np.pi / 2))
        out["policy"] = out.get("policy", protocols.POLICY_SIFT_DISCARD)
        cheat = out.get("cheat", "honest")
        out["cheat"] = cheat.label() if isinstance(cheat, protocols.CheatModel) else str(cheat)
    elif protocol != protocols.PROTOCOL_QSS:
        raise TransportError(f"unknown protocol {protocol!r}")
    return out


def serve_charlie(
    protocol: str,
    params: dict,
    host: str = "127.0.0.1",
    port: int = 7001,
    timeout: float = DEFAULT_TIMEOUT,
) -> protocols.SessionTranscript:
    """Listen for the two spokes and run the facilitator (multi-process CLI path)."""
    params = _normalized_params(protocol, params)
    listener = socket.create_server((host, port))
    listener.settimeout(timeout)
    try:
        first = SocketChannel(listener.accept()[0])
        second = SocketChannel(listener.accept()[0])
    except socket.timeout:
        raise TransportError("no spoke connected before timeout") from None
    finally:
        listener.close()
    return run_hub(first, second, protocol, params, timeout)


def connect_spoke(role: str, host: str, port: int, timeout: float = DEFAULT_TIMEOUT) -> None:
    """Connect a spoke to a listening facilitator (multi-process CLI path)."""
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"cannot connect to {host}:{port}: {exc}") from exc
    run_spoke(SocketChannel(sock), role, timeout)
