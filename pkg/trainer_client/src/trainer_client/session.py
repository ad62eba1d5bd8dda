"""Thin client for the augmentation sidecar protocol.

The client owns no augmentation math: it forwards PNG bytes, seeds and
strengths over newline-delimited JSON and hands predictions back, so the
engine stays the single source of truth.  One request is in flight at a
time and ids increase strictly.
"""

from __future__ import annotations

import base64
import json
import socket
import subprocess
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

PROTOCOL_VERSION = 1
AUGMENT_CHUNK = 64  # images per augment_batch request


class ProtocolError(Exception):
    """The server answered with an error or broke the framing contract."""


class Transport:
    def send_line(self, line: str) -> None:
        raise NotImplementedError

    def recv_line(self) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass


class StdioTransport(Transport):
    """Talks to a server subprocess over its stdin/stdout."""

    def __init__(self, command: Sequence[str], env=None):
        self.proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            env=env,
            text=True,
        )

    def send_line(self, line: str) -> None:
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def recv_line(self) -> str:
        line = self.proc.stdout.readline()
        if not line:
            raise ProtocolError("server closed the stream")
        return line

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=10)


class TcpTransport(Transport):
    def __init__(self, host: str, port: int, timeout: float = 10.0):
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ConnectionError(f"cannot reach {host}:{port}: {exc}") from exc
        self.reader = self.sock.makefile("r", encoding="utf-8")

    def send_line(self, line: str) -> None:
        self.sock.sendall((line + "\n").encode("utf-8"))

    def recv_line(self) -> str:
        line = self.reader.readline()
        if not line:
            raise ProtocolError("server closed the connection")
        return line

    def close(self) -> None:
        self.reader.close()
        self.sock.close()


@dataclass
class Session:
    transport: Transport
    version: int = PROTOCOL_VERSION
    next_id: int = 0
    levels: list[int] = field(default_factory=list)  # last snapshot seen
    epoch: int = 0

    def request(self, msg_type: str, payload: dict) -> dict:
        msg_id = self.next_id
        self.next_id += 1
        self.transport.send_line(
            json.dumps({"type": msg_type, "id": msg_id, "payload": payload})
        )
        reply = json.loads(self.transport.recv_line())
        if reply.get("type") == "error":
            raise ProtocolError(reply.get("payload", {}).get("message", "unknown error"))
        if reply.get("id") != msg_id:
            raise ProtocolError(f"response id {reply.get('id')} != request id {msg_id}")
        return reply

    def close(self) -> None:
        self.transport.close()


def connect(transport: Transport, labels: Sequence[int], config: dict | None = None) -> Session:
    """Exchange hello and verify the protocol version."""
    session = Session(transport=transport)
    reply = session.request(
        "hello",
        {"v": PROTOCOL_VERSION, "labels": list(labels), "config": config or {}},
    )
    if reply["type"] != "hello" or reply["payload"].get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unexpected hello response: {reply}")
    session.levels = list(reply["payload"]["levels"])
    return session


def connect_tcp(host: str, port: int, labels, config=None) -> Session:
    return connect(TcpTransport(host, port), labels, config)


def connect_stdio(command: Sequence[str], labels, config=None, env=None) -> Session:
    return connect(StdioTransport(command, env=env), labels, config)


def _augment_over_wire(session: Session, items: list[dict]) -> list[bytes]:
    """Round-trip a list of {png, strength, seed} items, chunked, in order."""
    out: list[bytes] = []
    for start in range(0, len(items), AUGMENT_CHUNK):
        chunk = items[start : start + AUGMENT_CHUNK]
        reply = session.request("augment_batch", {"items": chunk})
        if reply["type"] != "augmented_batch":
            raise ProtocolError(f"expected augmented_batch, got {reply['type']}")
        for item in reply["payload"]["items"]:
            out.append(base64.b64decode(item["png"]))
    return out


def epoch_cycle(
    session: Session,
    predictor: Callable[[bytes], int],
    image_source: Callable[[int], bytes],
) -> tuple[list[int], Iterator[tuple[int, bytes]]]:
    """Run one protocol epoch: probe, report, receive plan, stream images.

    predictor maps augmented PNG bytes to a class id; image_source maps a
    sample id to its original PNG bytes.  Returns the post-update level
    snapshot and a lazy (sample_id, png_bytes) iterator over the epoch plan.
    """
    plan = session.request("plan_probes", {})
    if plan["type"] != "plan_probes":
        raise ProtocolError(f"expected plan_probes, got {plan['type']}")

    results = []
    for row in plan["payload"]["classes"]:
        per_level = []
        for entry in row["entries"]:
            items = [
                {
                    "png": base64.b64encode(image_source(ref)).decode("ascii"),
                    "strength": entry["level"],
                    "seed": seed,
                }
                for ref, seed in zip(entry["refs"], entry["seeds"])
            ]
            augmented = _augment_over_wire(session, items)
            per_level.append(sum(1 for png in augmented if predictor(png) == row["class_id"]))
        results.append({"class_id": row["class_id"], "correct": per_level})

    snapshot = session.request("probe_results", {"classes": results})
    if snapshot["type"] != "lol_snapshot":
        raise ProtocolError(f"expected lol_snapshot, got {snapshot['type']}")
    session.levels = list(snapshot["payload"]["levels"])
    session.epoch = snapshot["payload"]["epoch"]

    plan_reply = session.request("epoch_plan", {})
    if plan_reply["type"] != "epoch_plan":
        raise ProtocolError(f"expected epoch_plan, got {plan_reply['type']}")
    directives = plan_reply["payload"]["directives"]

    def stream() -> Iterator[tuple[int, bytes]]:
        batch: list[tuple[int, dict]] = []

        def flush():
            wire_items = [item for _, item in batch]
            for (sid, _), png in zip(batch, _augment_over_wire(session, wire_items)):
                yield sid, png
            batch.clear()

        for d in directives:
            source = image_source(d["sample_id"])
            if not d["augment"]:
                yield from flush()
                yield d["sample_id"], source
                continue
            batch.append(
                (
                    d["sample_id"],
                    {
                        "png": base64.b64encode(source).decode("ascii"),
                        "strength": d["strength"],
                        "seed": d["seed"],
                    },
                )
            )
            if len(batch) >= AUGMENT_CHUNK:
                yield from flush()
        yield from flush()

    return session.levels, stream()
