"""Protocol adapter behavior against scripted server transcripts."""

import base64
import json

import pytest

from trainer_client.session import (
    PROTOCOL_VERSION,
    ProtocolError,
    Session,
    Transport,
    connect,
    epoch_cycle,
)


class FakeTransport(Transport):
    """Replays a scripted transcript; records what the client sent."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.sent = []

    def send_line(self, line):
        self.sent.append(json.loads(line))

    def recv_line(self):
        if not self.replies:
            raise AssertionError("client asked for more replies than scripted")
        reply = self.replies.pop(0)
        if callable(reply):
            reply = reply(self.sent[-1])
        return json.dumps(reply)


def hello_reply(msg):
    return {
        "type": "hello",
        "id": msg["id"],
        "payload": {"v": PROTOCOL_VERSION, "num_classes": 2, "levels": [0, 0]},
    }


class TestConnect:
    def test_hello_exchange(self):
        transport = FakeTransport([hello_reply])
        session = connect(transport, [0, 1], {"seed": 3})
        assert session.version == 1
        assert session.levels == [0, 0]
        sent = transport.sent[0]
        assert sent["type"] == "hello"
        assert sent["payload"]["v"] == 1
        assert sent["payload"]["labels"] == [0, 1]

    def test_version_mismatch_raises(self):
        def bad(msg):
            return {"type": "hello", "id": msg["id"], "payload": {"v": 2, "levels": []}}

        with pytest.raises(ProtocolError):
            connect(FakeTransport([bad]), [0])

    def test_server_error_surfaces(self):
        def err(msg):
            return {"type": "error", "id": msg["id"], "payload": {"message": "hello already exchanged"}}

        with pytest.raises(ProtocolError, match="hello already exchanged"):
            connect(FakeTransport([err]), [0])

    def test_id_echo_enforced(self):
        def wrong_id(msg):
            return {"type": "hello", "id": msg["id"] + 7, "payload": {"v": 1, "levels": []}}

        with pytest.raises(ProtocolError, match="id"):
            connect(FakeTransport([wrong_id]), [0])

    def test_ids_strictly_increase(self):
        transport = FakeTransport([hello_reply, lambda m: {"type": "metrics", "id": m["id"], "payload": {}}])
        session = connect(transport, [0])
        session.request("metrics", {})
        ids = [m["id"] for m in transport.sent]
        assert ids == sorted(set(ids)) == [0, 1]


class TestEpochCycleTranscript:
    def _scripted_session(self):
        png = base64.b64encode(b"fake-png-bytes").decode()

        def plan_reply(msg):
            assert msg["type"] == "plan_probes"
            return {
                "type": "plan_probes",
                "id": msg["id"],
                "payload": {
                    "epoch": 1,
                    "classes": [
                        {"class_id": 0, "level": 0, "probe_count": 2,
                         "entries": [{"level": 0, "refs": [0, 1], "seeds": [11, 12]}]},
                        {"class_id": 1, "level": 0, "probe_count": 2,
                         "entries": [{"level": 0, "refs": [2, 3], "seeds": [13, 14]}]},
                    ],
                },
            }

        def echo_augment(msg):
            assert msg["type"] == "augment_batch"
            return {
                "type": "augmented_batch",
                "id": msg["id"],
                "payload": {"items": [{"png": item["png"]} for item in msg["payload"]["items"]]},
            }

        def snapshot_reply(msg):
            assert msg["type"] == "probe_results"
            assert msg["payload"]["classes"] == [
                {"class_id": 0, "correct": [2]},
                {"class_id": 1, "correct": [0]},
            ]
            return {
                "type": "lol_snapshot",
                "id": msg["id"],
                "payload": {"epoch": 1, "levels": [1, 0], "threshold": 0.6},
            }

        def epoch_plan_reply(msg):
            assert msg["type"] == "epoch_plan"
            return {
                "type": "epoch_plan",
                "id": msg["id"],
                "payload": {
                    "epoch": 1,
                    "directives": [
                        {"sample_id": 0, "class_id": 0, "augment": True, "strength": 1, "seed": 5},
                        {"sample_id": 1, "class_id": 0, "augment": False, "strength": 0, "seed": 0},
                        {"sample_id": 2, "class_id": 1, "augment": True, "strength": 0, "seed": 6},
                    ],
                },
            }

        # the pass-through directive splits the training stream into two
        # augment_batch flushes (sample 0, then sample 2)
        transport = FakeTransport(
            [hello_reply, plan_reply, echo_augment, echo_augment, snapshot_reply,
             epoch_plan_reply, echo_augment, echo_augment]
        )
        return connect(transport, [0, 0, 1, 1]), transport, png

    def test_counts_and_stream_order(self):
        session, transport, _ = self._scripted_session()
        sources = {i: f"png-{i}".encode() for i in range(4)}

        # the fake server echoes payloads back, so the "augmented" image is the
        # original and a predictor keyed on bytes can be exact: class 0 correct,
        # class 1 wrong
        def predictor(png: bytes) -> int:
            return 0

        levels, stream = epoch_cycle(session, predictor, sources.__getitem__)
        assert levels == [1, 0]
        out = list(stream)
        assert [sid for sid, _ in out] == [0, 1, 2]
        assert out[1][1] == sources[1]  # pass-through original, untouched bytes
        assert out[0][1] == sources[0]  # echoed back by the fake server

    def test_wire_shapes(self):
        session, transport, _ = self._scripted_session()
        _, stream = epoch_cycle(
            session, lambda png: 0, {i: b"x" for i in range(4)}.__getitem__
        )
        list(stream)  # the training-stream batches are lazy
        types = [m["type"] for m in transport.sent]
        assert types == [
            "hello", "plan_probes", "augment_batch", "augment_batch",
            "probe_results", "epoch_plan", "augment_batch", "augment_batch",
        ]
        probe_batch = transport.sent[2]["payload"]["items"]
        assert [item["seed"] for item in probe_batch] == [11, 12]
        assert all(item["strength"] == 0 for item in probe_batch)
