import json
from unittest import mock

import pytest
import requests

from req2ltl.gateway import (
    BackendError,
    GenerationParams,
    HttpBackend,
    ScriptedBackend,
    SequenceBackend,
    TranscriptEntry,
    backend_from_env,
    load_transcript,
    prompt_digest,
)

PARAMS = GenerationParams()


class TestParams:
    def test_defaults_are_greedy(self):
        assert PARAMS.temperature == 0.0

    @pytest.mark.parametrize("kwargs", [{"max_tokens": 0}, {"timeout": 0}])
    def test_invariants(self, kwargs):
        with pytest.raises(ValueError):
            GenerationParams(**kwargs)


class TestScripted:
    def test_substring_match(self):
        backend = ScriptedBackend([TranscriptEntry(response='{"ok":1}', match="Step 1")])
        assert backend.complete("... Step 1 ...", PARAMS) == '{"ok":1}'

    def test_strict_order_rejects_out_of_order(self):
        backend = ScriptedBackend(
            [
                TranscriptEntry(response="a", match="first"),
                TranscriptEntry(response="b", match="second"),
            ]
        )
        with pytest.raises(BackendError) as exc:
            backend.complete("second", PARAMS)
        assert exc.value.kind == "exhausted"

    def test_exhausted_transcript(self):
        backend = ScriptedBackend([])
        with pytest.raises(BackendError) as exc:
            backend.complete("anything", PARAMS)
        assert exc.value.kind == "exhausted"

    def test_digest_match(self):
        entry = TranscriptEntry(response="r", digest=prompt_digest("exact prompt"))
        backend = ScriptedBackend([entry])
        assert backend.complete("exact prompt", PARAMS) == "r"
        backend2 = ScriptedBackend([entry])
        with pytest.raises(BackendError):
            backend2.complete("different prompt", PARAMS)

    def test_unordered_mode_consumes_each_entry_once(self):
        backend = ScriptedBackend(
            [
                TranscriptEntry(response="a", match="alpha"),
                TranscriptEntry(response="b", match="beta"),
            ],
            strict_order=False,
        )
        assert backend.complete("beta call", PARAMS) == "b"
        assert backend.complete("alpha call", PARAMS) == "a"
        with pytest.raises(BackendError):
            backend.complete("beta call", PARAMS)

    def test_determinism(self):
        entries = [TranscriptEntry(response=str(i)) for i in range(3)]
        first = ScriptedBackend(list(entries))
        second = ScriptedBackend(list(entries))
        outs1 = [first.complete("x", PARAMS) for _ in range(3)]
        outs2 = [second.complete("x", PARAMS) for _ in range(3)]
        assert outs1 == outs2

    def test_transcript_file_round_trip(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(
            json.dumps({"match": "m", "response": {"found": False}})
            + "\n"
            + json.dumps({"response": "plain text"})
            + "\n"
        )
        entries = load_transcript(path)
        assert entries[0].response == '{"found": false}'
        assert entries[1].match is None

    def test_transcript_file_requires_response(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"match": "m"}\n')
        with pytest.raises(ValueError):
            load_transcript(path)


class TestSequence:
    def test_replays_in_order(self):
        backend = SequenceBackend(["one", "two"])
        assert backend.complete("ignored", PARAMS) == "one"
        assert backend.complete("ignored", PARAMS) == "two"
        with pytest.raises(BackendError):
            backend.complete("ignored", PARAMS)


def fake_response(status=200, content="hello"):
    resp = mock.Mock()
    resp.status_code = status
    resp.json.return_value = {"choices": [{"message": {"content": content}}]}
    return resp


class TestHttp:
    def test_success(self):
        backend = HttpBackend("https://llm.example/v1", api_key="k", model="m")
        with mock.patch("requests.post", return_value=fake_response()) as post:
            assert backend.complete("hi", PARAMS) == "hello"
        payload = post.call_args.kwargs["json"]
        assert payload["model"] == "m"
        assert payload["messages"][0]["content"] == "hi"

    def test_http_error_status(self):
        backend = HttpBackend("https://llm.example/v1")
        with mock.patch("requests.post", return_value=fake_response(status=401)):
            with pytest.raises(BackendError) as exc:
                backend.complete("hi", PARAMS)
        assert exc.value.kind == "http"
        assert exc.value.status == 401

    def test_timeout(self):
        backend = HttpBackend("https://llm.example/v1")
        with mock.patch("requests.post", side_effect=requests.Timeout):
            with pytest.raises(BackendError) as exc:
                backend.complete("hi", PARAMS)
        assert exc.value.kind == "timeout"

    def test_transport_retry_then_fail(self):
        backend = HttpBackend("https://llm.example/v1")
        with mock.patch(
            "requests.post", side_effect=requests.ConnectionError("unreachable")
        ) as post, mock.patch("time.sleep"):
            with pytest.raises(BackendError) as exc:
                backend.complete("hi", PARAMS)
        assert post.call_count == 3  # initial + 2 retries
        assert exc.value.kind == "http"

    def test_transient_5xx_retried(self):
        backend = HttpBackend("https://llm.example/v1")
        responses = [fake_response(status=503), fake_response()]
        with mock.patch("requests.post", side_effect=responses), mock.patch("time.sleep"):
            assert backend.complete("hi", PARAMS) == "hello"

    def test_empty_completion_is_an_error(self):
        backend = HttpBackend("https://llm.example/v1")
        with mock.patch("requests.post", return_value=fake_response(content="")):
            with pytest.raises(BackendError):
                backend.complete("hi", PARAMS)

    def test_max_in_flight_cap(self):
        import threading
        import time as time_mod

        backend = HttpBackend("https://llm.example/v1", max_in_flight=2)
        in_flight = 0
        peak = 0
        gate = threading.Lock()

        def slow_post(*args, **kwargs):
            nonlocal in_flight, peak
            with gate:
                in_flight += 1
                peak = max(peak, in_flight)
            time_mod.sleep(0.02)
            with gate:
                in_flight -= 1
            return fake_response()

        with mock.patch("requests.post", side_effect=slow_post):
            threads = [
                threading.Thread(target=backend.complete, args=("hi", PARAMS))
                for _ in range(6)
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        assert peak <= 2

    def test_env_configuration(self, monkeypatch):
        monkeypatch.delenv("REQ2LTL_LLM_ENDPOINT", raising=False)
        with pytest.raises(BackendError):
            backend_from_env()
        monkeypatch.setenv("REQ2LTL_LLM_ENDPOINT", "https://llm.example/v1/")
        monkeypatch.setenv("REQ2LTL_LLM_API_KEY", "secret")
        monkeypatch.setenv("REQ2LTL_LLM_MODEL", "model-x")
        backend = backend_from_env()
        assert backend.endpoint == "https://llm.example/v1"
        assert backend.model == "model-x"
