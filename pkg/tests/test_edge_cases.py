import json

import httpx
import pytest
from PIL import Image

from omni.backends import BackendProfile, RemoteBackend, ToyBackend
from omni.bench.judge import parse_msib_verdict
from omni.dialogue import TemplateSet, render_question
from omni.errors import BackendError, InputError, ValidationError
from omni.interleave import ConditioningHandle
from omni.session import QuestionCategory, SessionState
from omni.store import DataStore
from omni.vision import GridSpec, tile_image


class CountingTimeoutTransport(httpx.BaseTransport):
    def __init__(self, failures: int, response: httpx.Response):
        self.failures = failures
        self.response = response
        self.calls = 0

    def handle_request(self, request):
        self.calls += 1
        if self.calls <= self.failures:
            raise httpx.ConnectTimeout("slow backend")
        return self.response


class FakeClock:
    def __init__(self):
        self.t = 0.0
        self.sleeps = []

    def now(self):
        return self.t

    def sleep(self, s):
        self.sleeps.append(s)
        self.t += s


def test_tile_image_rejects_empty_buffer():
    empty = Image.new("RGB", (0, 0))
    with pytest.raises(InputError):
        tile_image(empty, GridSpec(1, 1, False))


def test_toy_speech_rejects_bad_group_sizes():
    b = ToyBackend()
    cond = ConditioningHandle(ref="x")
    with pytest.raises(BackendError):
        b.stream_speech([], cond, final=False)
    with pytest.raises(BackendError):
        b.stream_speech(["a"] * 6, cond, final=False)


def test_remote_timeout_retries_then_surfaces_retryable_error():
    transport = CountingTimeoutTransport(failures=99, response=httpx.Response(200))
    profile = BackendProfile(kind="remote", endpoint="http://test", max_retries=2)
    backend = RemoteBackend(profile, transport=transport, clock=FakeClock())
    with pytest.raises(BackendError) as err:
        backend.judge("hello")
    assert err.value.retryable
    assert transport.calls == 3


def test_remote_timeout_then_success():
    ok = httpx.Response(200, json={"choices": [{"message": {"content": "fine"}}]})
    transport = CountingTimeoutTransport(failures=1, response=ok)
    profile = BackendProfile(kind="remote", endpoint="http://test", max_retries=2)
    backend = RemoteBackend(profile, transport=transport, clock=FakeClock())
    assert backend.judge("hello") == "fine"
    assert transport.calls == 2


def test_verdict_parser_skips_undecodable_brace_runs():
    verdict = {
        "transcript": "t",
        "speech_quality_score": 3,
        "content_quality_score": 4,
        "speech_score_reasoning": "a",
        "content_score_reasoning": "b",
    }
    raw = "think {not json here} and then " + json.dumps(verdict)
    assert parse_msib_verdict(raw).content_quality_score == 4


def test_current_image_template_includes_media_marker(media_repo):
    templates = TemplateSet.default()
    entry = media_repo.images[0]
    prompt = render_question(QuestionCategory.IMAGE_RELEVANT_CURRENT, None, entry, templates)
    assert f"[image {entry.id}]" in prompt


def test_store_rejects_pathy_session_ids(tmp_path):
    store = DataStore(tmp_path)
    with pytest.raises(ValidationError):
        store.save_session(SessionState(id="../escape"), packs=[])
    with pytest.raises(ValidationError):
        store.session_exists("a/b")
