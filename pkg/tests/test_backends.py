import json

import httpx
import pytest

from omni.backends import (
    BackendProfile,
    GenerationRequest,
    RemoteBackend,
    SlidingWindowRateLimiter,
    ToyBackend,
    make_backend,
)
from omni.errors import BackendError, ConfigError
from omni.interleave import ConditioningHandle
from omni.session import ContextPack, ContextSegment


class FakeClock:
    def __init__(self):
        self.t = 0.0
        self.sleeps: list[float] = []

    def now(self) -> float:
        return self.t

    def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        self.t += seconds


def pack_of(text: str) -> ContextPack:
    seg = ContextSegment(turn_index=0, modality="text", token_span=len(text.split()), text=text)
    return ContextPack(segments=(seg,), total_tokens=seg.token_span, evicted_turns=())


class TestToyBackend:
    def test_deterministic_text(self):
        b = ToyBackend()
        req = GenerationRequest(context=pack_of("tell me about the weather"))
        assert list(b.stream_text(req)) == list(b.stream_text(req))

    def test_echo_contract(self):
        b = ToyBackend()
        req = GenerationRequest(context=pack_of("question\nECHO:xyz"))
        assert list(b.stream_text(req)) == ["xyz"]

    def test_echo_multiword_line(self):
        b = ToyBackend()
        req = GenerationRequest(context=pack_of("ECHO:the answer is blue\nmore text"))
        assert list(b.stream_text(req)) == ["the", "answer", "is", "blue"]

    def test_speech_group_sizes(self):
        b = ToyBackend()
        cond = ConditioningHandle(ref="c")
        assert len(b.stream_speech(["a", "b", "c", "d", "e"], cond, final=False)) == 25
        assert len(b.stream_speech(["a", "b"], cond, final=True)) == 10

    def test_speech_determinism(self):
        b = ToyBackend()
        cond = ConditioningHandle(ref="c")
        one = b.stream_speech(["x"], cond, final=False)
        two = b.stream_speech(["x"], cond, final=False)
        assert one == two

    def test_toy_judge_is_parseable(self):
        b = ToyBackend()
        verdict = json.loads(b.judge("judge this speech sample"))
        assert 1 <= verdict["speech_quality_score"] <= 5
        assert 1 <= verdict["content_quality_score"] <= 5
        assert set(verdict) >= {
            "transcript",
            "speech_quality_score",
            "content_quality_score",
            "speech_score_reasoning",
            "content_score_reasoning",
        }

    def test_toy_judge_perfect_keyword(self):
        verdict = json.loads(ToyBackend().judge("this is PERFECT output"))
        assert (verdict["speech_quality_score"], verdict["content_quality_score"]) == (5, 5)

    def test_toy_judge_reference_match(self):
        raw = ToyBackend().judge("Reference answer: Paris\nModel response: paris\n")
        assert json.loads(raw)["correct"] is True
        raw = ToyBackend().judge("Reference answer: Paris\nModel response: London\n")
        assert json.loads(raw)["correct"] is False


class TestRemoteBackend:
    def _backend(self, handler, max_retries=2, clock=None, **kwargs):
        profile = BackendProfile(
            kind="remote", endpoint="http://test", max_retries=max_retries, **kwargs
        )
        return RemoteBackend(profile, transport=httpx.MockTransport(handler), clock=clock or FakeClock())

    def test_retry_after_503(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(503, text="busy")
            return httpx.Response(
                200,
                json={"choices": [{"message": {"content": "ok"}}]},
            )

        b = self._backend(handler)
        assert b.judge("hello") == "ok"
        assert calls["n"] == 2

    def test_retry_budget_exhausted(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            return httpx.Response(500, text="down")

        clock = FakeClock()
        b = self._backend(handler, max_retries=2, clock=clock)
        with pytest.raises(BackendError) as err:
            b.judge("hello")
        assert calls["n"] == 3  # first try + two retries
        assert err.value.retryable
        assert clock.sleeps == [0.1, 0.2]  # deterministic bounded backoff

    def test_4xx_is_not_retried_and_captures_body(self):
        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(400, text="bad payload")

        b = self._backend(handler)
        with pytest.raises(BackendError) as err:
            b.judge("hello")
        assert err.value.body == "bad payload"
        assert not err.value.retryable

    def test_stream_text_parses_event_stream(self):
        body = "".join(
            [
                'data: {"choices":[{"delta":{"content":"hello"}}]}\n\n',
                'data: {"choices":[{"delta":{"content":" world"}}]}\n\n',
                "data: [DONE]\n\n",
            ]
        )

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, text=body, headers={"content-type": "text/event-stream"})

        b = self._backend(handler)
        req = GenerationRequest(context=pack_of("hi"))
        assert list(b.stream_text(req)) == ["hello", " world"]

    def test_speech_tokens_endpoint(self):
        def handler(request: httpx.Request) -> httpx.Response:
            payload = json.loads(request.content)
            assert payload["final"] is False
            return httpx.Response(200, json={"tokens": list(range(25))})

        b = self._backend(handler)
        out = b.stream_speech(["a"], ConditioningHandle(ref="r"), final=False)
        assert out == list(range(25))

    def test_remote_requires_endpoint(self):
        with pytest.raises(ConfigError):
            BackendProfile(kind="remote")


class TestRateLimiter:
    def test_never_exceeds_window(self):
        clock = FakeClock()
        limiter = SlidingWindowRateLimiter(per_minute=3, clock=clock)
        grants = []
        for _ in range(10):
            limiter.acquire()
            grants.append(clock.now())
            clock.t += 1.0
        # Check the invariant over every 60 s sliding window.
        for i, t in enumerate(grants):
            in_window = [g for g in grants if t <= g < t + 60.0]
            assert len(in_window) <= 3, (i, grants)

    def test_waits_for_oldest_to_expire(self):
        clock = FakeClock()
        limiter = SlidingWindowRateLimiter(per_minute=2, clock=clock)
        limiter.acquire()
        limiter.acquire()
        limiter.acquire()
        assert clock.sleeps and clock.now() >= 60.0


def test_make_backend_dispatch():
    assert isinstance(make_backend(BackendProfile(kind="toy")), ToyBackend)
