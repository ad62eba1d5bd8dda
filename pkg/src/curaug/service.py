"""Line-delimited JSON sidecar protocol for external trainers.

One UTF-8 JSON object per line; every request gets exactly one response
carrying the same client-assigned id.  A session walks hello, then per
epoch: plan_probes -> probe_results (answered with lol_snapshot) ->
epoch_plan, with augment_batch and metrics allowed at any point after
hello.  Malformed lines are answered with an error (id -1) and the session
keeps its last good state.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import socketserver
import sys
from enum import Enum

from .compose import apply_strength
from .curriculum import CurriculumConfig, CurriculumEngine
from .image import from_png_bytes, to_png_bytes
from .levels import ProbeOutcome
from .rng import Stream

PROTOCOL_VERSION = 1

log = logging.getLogger("curaug.service")


class SessionState(Enum):
    AWAIT_HELLO = "await_hello"
    AWAIT_PLAN_PROBES = "await_plan_probes"
    AWAIT_PROBE_RESULTS = "await_probe_results"
    AWAIT_EPOCH_PLAN = "await_epoch_plan"


class ProtocolError(Exception):
    pass


def _error(msg_id, message: str) -> dict:
    return {"type": "error", "id": msg_id, "payload": {"message": message}}


class Session:
    """Protocol state machine; transport-agnostic (feed lines, get replies)."""

    # message types that participate in the strict per-epoch ordering
    _CYCLE = {"hello", "plan_probes", "probe_results", "epoch_plan"}

    def __init__(self):
        self.state = SessionState.AWAIT_HELLO
        self.engine: CurriculumEngine | None = None
        self.current_plans = None
        self.last_id: int | None = None

    def handle_line(self, line: str) -> dict:
        line = line.strip()
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error(-1, f"malformed JSON: {exc.msg}")
        if not isinstance(msg, dict):
            return _error(-1, "message must be a JSON object")
        msg_id = msg.get("id")
        if not isinstance(msg_id, int):
            return _error(-1, "missing integer id")
        if self.last_id is not None and msg_id <= self.last_id:
            return _error(msg_id, f"ids must be strictly increasing (last {self.last_id})")
        msg_type = msg.get("type")
        payload = msg.get("payload", {})
        if not isinstance(payload, dict):
            return _error(msg_id, "payload must be an object")
        try:
            reply = self._dispatch(msg_type, msg_id, payload)
        except ProtocolError as exc:
            return _error(msg_id, str(exc))
        except Exception as exc:  # session must survive any bad payload
            log.exception("request %s failed", msg_type)
            return _error(msg_id, f"{type(exc).__name__}: {exc}")
        self.last_id = msg_id
        return reply

    def _dispatch(self, msg_type, msg_id, payload) -> dict:
        if msg_type == "hello":
            return self._on_hello(msg_id, payload)
        if self.state is SessionState.AWAIT_HELLO:
            raise ProtocolError("session must start with hello")
        if msg_type == "augment_batch":
            return self._on_augment(msg_id, payload)
        if msg_type == "metrics":
            return self._on_metrics(msg_id)
        if msg_type == "plan_probes":
            self._require_state(SessionState.AWAIT_PLAN_PROBES, msg_type)
            return self._on_plan_probes(msg_id)
        if msg_type == "probe_results":
            self._require_state(SessionState.AWAIT_PROBE_RESULTS, msg_type)
            return self._on_probe_results(msg_id, payload)
        if msg_type == "epoch_plan":
            self._require_state(SessionState.AWAIT_EPOCH_PLAN, msg_type)
            return self._on_epoch_plan(msg_id)
        raise ProtocolError(f"unknown message type {msg_type!r}")

    def _require_state(self, wanted: SessionState, msg_type: str) -> None:
        if self.state is not wanted:
            raise ProtocolError(
                f"{msg_type} not allowed in state {self.state.value}"
            )

    def _on_hello(self, msg_id, payload) -> dict:
        if self.state is not SessionState.AWAIT_HELLO:
            raise ProtocolError("hello already exchanged")
        version = payload.get("v")
        if version != PROTOCOL_VERSION:
            raise ProtocolError(f"unsupported protocol version {version!r}")
        labels = payload.get("labels")
        if not isinstance(labels, list) or not labels:
            raise ProtocolError("hello payload needs a non-empty labels list")
        raw_cfg = payload.get("config", {})
        if not isinstance(raw_cfg, dict):
            raise ProtocolError("config must be an object")
        allowed = {
            "augment_prob",
            "threshold",
            "probe_count",
            "epochs",
            "max_strength",
            "seed",
            "auto_tune_threshold",
        }
        unknown = set(raw_cfg) - allowed
        if unknown:
            raise ProtocolError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = CurriculumConfig(**raw_cfg)
            self.engine = CurriculumEngine(labels, cfg)
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"bad hello payload: {exc}") from exc
        self.state = SessionState.AWAIT_PLAN_PROBES
        return {
            "type": "hello",
            "id": msg_id,
            "payload": {
                "v": PROTOCOL_VERSION,
                "num_classes": self.engine.num_classes,
                "levels": list(self.engine.table.levels),
            },
        }

    def _on_plan_probes(self, msg_id) -> dict:
        plans = self.engine.probe_plans()
        self.current_plans = plans
        classes = []
        for c in range(self.engine.num_classes):
            plan = plans[c]
            classes.append(
                {
                    "class_id": c,
                    "level": plan.level,
                    "probe_count": plan.probe_count,
                    "entries": [
                        {
                            "level": entry.level,
                            "refs": list(entry.refs),
                            "seeds": list(entry.seeds),
                        }
                        for entry in plan.entries
                    ],
                }
            )
        self.state = SessionState.AWAIT_PROBE_RESULTS
        return {
            "type": "plan_probes",
            "id": msg_id,
            "payload": {"epoch": self.engine.next_epoch, "classes": classes},
        }

    def _on_probe_results(self, msg_id, payload) -> dict:
        rows = payload.get("classes")
        if not isinstance(rows, list):
            raise ProtocolError("probe_results payload needs a classes list")
        outcomes = {}
        for row in rows:
            c = row.get("class_id")
            correct = row.get("correct")
            if not isinstance(c, int) or not isinstance(correct, list):
                raise ProtocolError("each result needs class_id and correct list")
            outcomes[c] = ProbeOutcome(class_id=c, correct=tuple(int(v) for v in correct))
        try:
            snapshot = self.engine.apply_outcomes(outcomes)
        except ValueError as exc:
            raise ProtocolError(str(exc)) from exc
        self.current_plans = None
        self.state = SessionState.AWAIT_EPOCH_PLAN
        return {
            "type": "lol_snapshot",
            "id": msg_id,
            "payload": {
                "epoch": self.engine.table.epoch,
                "levels": list(snapshot),
                "threshold": self.engine.threshold,
            },
        }

    def _on_epoch_plan(self, msg_id) -> dict:
        plan = self.engine.epoch_plan()
        directives = [
            {
                "sample_id": d.sample_id,
                "class_id": d.class_id,
                "augment": d.augment,
                "strength": d.strength,
                "seed": d.seed,
            }
            for d in plan
        ]
        self.state = SessionState.AWAIT_PLAN_PROBES
        return {
            "type": "epoch_plan",
            "id": msg_id,
            "payload": {"epoch": plan.epoch, "directives": directives},
        }

    def _on_augment(self, msg_id, payload) -> dict:
        items = payload.get("items")
        if not isinstance(items, list):
            raise ProtocolError("augment_batch payload needs an items list")
        out = []
        for i, item in enumerate(items):
            try:
                png = base64.b64decode(item["png"], validate=True)
                img = from_png_bytes(png)
                strength = int(item["strength"])
                seed = int(item["seed"])
            except (KeyError, TypeError, ValueError, binascii.Error) as exc:
                raise ProtocolError(f"bad augment item {i}: {exc}") from exc
            result = apply_strength(img, strength, Stream(seed))
            out.append({"png": base64.b64encode(to_png_bytes(result)).decode("ascii")})
        return {"type": "augmented_batch", "id": msg_id, "payload": {"items": out}}

    def _on_metrics(self, msg_id) -> dict:
        return {
            "type": "metrics",
            "id": msg_id,
            "payload": {
                "epoch": self.engine.table.epoch,
                "threshold": self.engine.threshold,
                "mean_level": sum(self.engine.table.levels) / self.engine.num_classes,
                "history_rows": len(self.engine.table.history) * self.engine.num_classes,
            },
        }


def serve_streams(instream, outstream) -> None:
    """Run one session over text streams until EOF."""
    session = Session()
    for line in instream:
        if not line.strip():
            continue
        reply = session.handle_line(line)
        outstream.write(json.dumps(reply) + "\n")
        outstream.flush()


def serve_stdio() -> None:
    serve_streams(sys.stdin, sys.stdout)


class _TCPHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = Session()
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace")
            if not line.strip():
                continue
            reply = session.handle_line(line)
            self.wfile.write((json.dumps(reply) + "\n").encode("utf-8"))
            self.wfile.flush()


def serve_tcp(host: str, port: int, *, announce=print) -> None:
    """One session per connection; serves until interrupted."""
    with socketserver.ThreadingTCPServer((host, port), _TCPHandler) as server:
        server.daemon_threads = True
        bound = server.server_address
        announce(f"listening {bound[0]}:{bound[1]}", flush=True)
        server.serve_forever()
