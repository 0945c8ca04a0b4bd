import pytest

from orbench.gateway import (Cassette, CassetteMode, Gateway, PanickingTransport, ReplayMiss,
                             RetriesExhausted, ScriptedTransport, TransportReply,
                             request_fingerprint)


def make_gateway(transport, **kwargs):
    kwargs.setdefault("model_id", "test-model")
    kwargs.setdefault("sleep", lambda seconds: None)
    return Gateway(transport=transport, **kwargs)


class TestComplete:
    def test_captures_both_channels(self):
        transport = ScriptedTransport([TransportReply("the answer", reasoning="the thoughts")])
        record = make_gateway(transport).complete("prompt", "system", strategy="Baseline")
        assert record.content == "the answer"
        assert record.reasoning == "the thoughts"
        assert record.attempt_count == 1
        assert record.model_id == "test-model"

    def test_retries_after_transport_error(self):
        sleeps = []
        transport = ScriptedTransport([RuntimeError("api down"), TransportReply("ok")])
        gateway = make_gateway(transport, sleep=sleeps.append)
        record = gateway.complete("p")
        assert record.content == "ok"
        assert record.attempt_count == 2
        assert sleeps == [10.0]  # fixed delay between retries

    def test_retries_exhausted(self):
        transport = ScriptedTransport([RuntimeError("down")] * 4)
        gateway = make_gateway(transport, max_retries=3)
        with pytest.raises(RetriesExhausted):
            gateway.complete("p")
        assert transport.calls == 4  # initial try plus max_retries

    def test_retry_never_refetches_after_success(self):
        transport = ScriptedTransport([TransportReply("only")])
        gateway = make_gateway(transport)
        gateway.complete("p")
        assert transport.calls == 1

    def test_no_transport_and_no_replay_is_an_error(self):
        gateway = Gateway(transport=None)
        with pytest.raises(ValueError):
            gateway.complete("p")


class TestCassette:
    def test_record_then_replay_yields_equal_records(self, tmp_path):
        cassette = Cassette(CassetteMode.RECORD)
        transport = ScriptedTransport([TransportReply("a", "ra"), TransportReply("b", "rb")])
        recorder = make_gateway(transport, cassette=cassette)
        first = [recorder.complete("p1"), recorder.complete("p2")]

        path = tmp_path / "run.jsonl"
        cassette.save(path)
        replayer = make_gateway(PanickingTransport(),
                                cassette=Cassette.load(path, CassetteMode.REPLAY))
        second = [replayer.complete("p1"), replayer.complete("p2")]
        assert first == second

    def test_replay_makes_zero_network_calls(self):
        cassette = Cassette(CassetteMode.RECORD)
        recorder = make_gateway(ScriptedTransport([TransportReply("x")]), cassette=cassette)
        recorder.complete("p")
        cassette.mode = CassetteMode.REPLAY
        replayer = make_gateway(PanickingTransport(), cassette=cassette)
        assert replayer.complete("p").content == "x"  # PanickingTransport would raise

    def test_replay_miss(self):
        cassette = Cassette(CassetteMode.REPLAY)
        gateway = make_gateway(PanickingTransport(), cassette=cassette)
        with pytest.raises(ReplayMiss):
            gateway.complete("never recorded")

    def test_fifo_consumption_for_repeated_requests(self):
        cassette = Cassette(CassetteMode.RECORD)
        recorder = make_gateway(ScriptedTransport([TransportReply("first"),
                                                   TransportReply("second")]),
                                cassette=cassette)
        recorder.complete("same prompt")
        recorder.complete("same prompt")
        cassette.mode = CassetteMode.REPLAY
        replayer = make_gateway(PanickingTransport(), cassette=cassette)
        assert replayer.complete("same prompt").content == "first"
        assert replayer.complete("same prompt").content == "second"
        # exhausted queues stick at the last reply so extra replays stay deterministic
        assert replayer.complete("same prompt").content == "second"

    def test_passthrough_mode_does_not_record(self):
        cassette = Cassette(CassetteMode.PASSTHROUGH)
        gateway = make_gateway(ScriptedTransport([TransportReply("x")]), cassette=cassette)
        gateway.complete("p")
        assert len(cassette) == 0

    def test_fingerprint_distinguishes_requests(self):
        base = request_fingerprint("m", "s", "p")
        assert request_fingerprint("m", "s", "q") != base
        assert request_fingerprint("m", "t", "p") != base
        assert request_fingerprint("n", "s", "p") != base
        assert request_fingerprint("m", "s", "p") == base


class TestTools:
    def test_model_that_never_calls_tools(self):
        transport = ScriptedTransport([TransportReply("final answer, no tools")])
        record = make_gateway(transport).complete_with_tools("p", tool_handler=lambda n: "?")
        assert record.tool_transcript == []
        assert record.content == "final answer, no tools"
        assert not record.tool_budget_exhausted

    def test_single_lookup_then_answer(self):
        transport = ScriptedTransport([
            TransportReply("TOOL: addVar"),
            TransportReply("done, using addVar"),
        ])
        seen = []

        def handler(name):
            seen.append(name)
            return f"SIGNATURE: Model.{name}(...)"

        record = make_gateway(transport).complete_with_tools("p", tool_handler=handler)
        assert seen == ["addVar"]
        assert len(record.tool_transcript) == 1
        assert record.tool_transcript[0].query == "addVar"
        assert record.content == "done, using addVar"

    def test_tool_result_is_injected_into_conversation(self):
        conversations = []

        def responder(messages, model_id):
            conversations.append([m["content"] for m in messages])
            if any(m["content"].startswith("TOOL_RESULT:") for m in messages):
                return TransportReply("finished")
            return TransportReply("TOOL: quicksum")

        record = make_gateway(ScriptedTransport(responder=responder)).complete_with_tools(
            "p", tool_handler=lambda n: "docs for " + n)
        assert record.content == "finished"
        assert any("TOOL_RESULT: docs for quicksum" in c for c in conversations[-1])

    def test_budget_exhaustion_flags_record(self):
        transport = ScriptedTransport([TransportReply(f"TOOL: name{i}") for i in range(9)])
        record = make_gateway(transport).complete_with_tools(
            "p", tool_handler=lambda n: "r", max_tool_calls=8)
        assert record.tool_budget_exhausted
        assert len(record.tool_transcript) == 8

    def test_tool_loop_replays_deterministically(self, tmp_path):
        cassette = Cassette(CassetteMode.RECORD)
        transport = ScriptedTransport([
            TransportReply("TOOL: addVar"),
            TransportReply("the final code"),
        ])
        recorder = make_gateway(transport, cassette=cassette)
        first = recorder.complete_with_tools("p", tool_handler=lambda n: "sig")
        path = tmp_path / "tools.jsonl"
        cassette.save(path)

        replayer = make_gateway(PanickingTransport(),
                                cassette=Cassette.load(path, CassetteMode.REPLAY))
        second = replayer.complete_with_tools("p", tool_handler=lambda n: "sig")
        assert first == second
