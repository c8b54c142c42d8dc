"""Pluggable model backends.

Two implementations of one interface: a deterministic toy backend used by
tests and offline runs, and a remote HTTP client speaking the de facto
chat-completions shape with retries and a sliding-window rate limiter.
The judge role uses the same client; only the prompt differs.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Iterator, Protocol, Sequence

import httpx

from .errors import BackendError, ConfigError
from .interleave import ConditioningHandle, SPEECH_GROUP_SIZE
from .session import ContextPack

ENV_BACKEND_URL = "OMNI_BACKEND_URL"
ENV_BACKEND_KEY = "OMNI_BACKEND_KEY"
ENV_JUDGE_URL = "OMNI_JUDGE_URL"
ENV_JUDGE_KEY = "OMNI_JUDGE_KEY"

SPEECH_VOCAB = 4096
TOY_SPEECH_TOKENS_PER_TEXT_TOKEN = 5


def stable_hash(data: bytes | str) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "big")


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class SlidingWindowRateLimiter:
    """At most ``per_minute`` acquisitions in any 60 s window."""

    def __init__(self, per_minute: int, clock: Clock | None = None):
        if per_minute < 1:
            raise ConfigError("rate limit must be at least 1 per minute")
        self.per_minute = per_minute
        self.clock = clock or SystemClock()
        self._stamps: list[float] = []
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self.clock.now()
                self._stamps = [t for t in self._stamps if now - t < 60.0]
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                self.clock.sleep(self._stamps[0] + 60.0 - now)


@dataclass(frozen=True)
class BackendProfile:
    kind: str  # "toy" | "remote"
    endpoint: str | None = None
    model_name: str = "toy"
    timeout_s: float = 30.0
    max_retries: int = 2
    rate_limit_per_min: int | None = None
    api_key: str | None = None
    seed: int = 0
    # Decoding parameters, recorded in every report's config snapshot.
    temperature: float = 0.0
    top_p: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("toy", "remote"):
            raise ConfigError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ConfigError("remote backends require an endpoint URL")
        if self.timeout_s <= 0:
            raise ConfigError("timeout must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "BackendProfile":
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model_name": self.model_name,
            "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
            "rate_limit_per_min": self.rate_limit_per_min,
            "seed": self.seed,
            "temperature": self.temperature,
            "top_p": self.top_p,
        }

    @classmethod
    def from_env(cls, role: str = "backend") -> "BackendProfile":
        """Remote profile from OMNI_BACKEND_URL/KEY or OMNI_JUDGE_URL/KEY; toy if unset."""
        url_var = ENV_JUDGE_URL if role == "judge" else ENV_BACKEND_URL
        key_var = ENV_JUDGE_KEY if role == "judge" else ENV_BACKEND_KEY
        url = os.environ.get(url_var)
        if not url:
            return cls(kind="toy")
        return cls(kind="remote", endpoint=url, api_key=os.environ.get(key_var))


@dataclass(frozen=True)
class GenerationRequest:
    context: ContextPack
    style: str | None = None
    stream: bool = True


@dataclass(frozen=True)
class JudgeMedia:
    kind: str  # "audio" | "image"
    data: bytes
    mime: str = "application/octet-stream"


class Backend(Protocol):
    profile: BackendProfile

    def stream_text(self, req: GenerationRequest) -> Iterator[str]: ...

    def stream_speech(
        self, text_group: Sequence[str], conditioning: ConditioningHandle, final: bool
    ) -> list[int]: ...

    def judge(self, prompt: str, media: Sequence[JudgeMedia] = ()) -> str: ...


_TOY_VOCAB = (
    "the answer follows from what was said earlier and it stays consistent "
    "with every image and sound mentioned so far in this conversation overall"
).split()

_ECHO_RE = re.compile(r"ECHO:(.*)")


class ToyBackend:
    """Pure function of (request bytes, seed); replay-identical by construction.

    Contract points used by tests:
      * a context containing "ECHO:<line>" streams back that line's words;
      * non-final speech groups are exactly 25 hash-derived ids, final groups
        are 5 ids per text token;
      * the judge answers with a well-formed verdict object whose scores are
        keyword-driven (PERFECT -> 5/5, GARBLED -> speech 1, OFFTOPIC ->
        content 1) and, when the prompt carries "Reference answer:" and
        "Model response:" lines, a correctness flag from exact match.
    """

    def __init__(self, profile: BackendProfile | None = None):
        self.profile = profile or BackendProfile(kind="toy")

    def stream_text(self, req: GenerationRequest) -> Iterator[str]:
        ctx_text = req.context.text_content()
        m = _ECHO_RE.search(ctx_text)
        if m:
            yield from m.group(1).split()
            return
        seed_material = json.dumps(
            {
                "segments": [
                    [s.turn_index, s.modality, s.token_span, s.text, s.media_id]
                    for s in req.context.segments
                ],
                "style": req.style,
                "seed": self.profile.seed,
            },
            sort_keys=True,
        )
        rng = random.Random(stable_hash(seed_material))
        n = rng.randint(8, 16)
        yield from (rng.choice(_TOY_VOCAB) for _ in range(n))

    def stream_speech(
        self, text_group: Sequence[str], conditioning: ConditioningHandle, final: bool
    ) -> list[int]:
        if not 1 <= len(text_group) <= 5:
            raise BackendError(f"speech requests take 1-5 text tokens, got {len(text_group)}")
        count = (
            TOY_SPEECH_TOKENS_PER_TEXT_TOKEN * len(text_group) if final else SPEECH_GROUP_SIZE
        )
        base = stable_hash(
            f"{self.profile.seed}|{conditioning.to_json()}|{' '.join(text_group)}|{final}"
        )
        return [(base + 2654435761 * i) % SPEECH_VOCAB for i in range(count)]

    def judge(self, prompt: str, media: Sequence[JudgeMedia] = ()) -> str:
        speech = 5 if "PERFECT" in prompt else (1 if "GARBLED" in prompt else 4)
        content = 5 if "PERFECT" in prompt else (1 if "OFFTOPIC" in prompt else 4)
        verdict: dict = {
            "transcript": "toy transcript of the synthesized speech",
            "speech_quality_score": speech,
            "content_quality_score": content,
            "speech_score_reasoning": "deterministic toy rubric",
            "content_score_reasoning": "deterministic toy rubric",
        }
        ref = re.search(r"Reference answer:\s*(.*)", prompt)
        resp = re.search(r"Model response:\s*(.*)", prompt)
        if ref and resp:
            correct = ref.group(1).strip().lower() == resp.group(1).strip().lower()
            verdict["correct"] = correct
            verdict["content_quality_score"] = 5 if correct else 2
        return json.dumps(verdict)


class RemoteBackend:
    """HTTP client for chat-completions-style servers, with retries and rate limiting."""

    def __init__(
        self,
        profile: BackendProfile,
        transport: httpx.BaseTransport | None = None,
        clock: Clock | None = None,
    ):
        if profile.kind != "remote":
            raise ConfigError("RemoteBackend requires a remote profile")
        self.profile = profile
        self.clock = clock or SystemClock()
        headers = {}
        if profile.api_key:
            headers["Authorization"] = f"Bearer {profile.api_key}"
        self._client = httpx.Client(
            base_url=profile.endpoint.rstrip("/"),
            timeout=profile.timeout_s,
            headers=headers,
            transport=transport,
        )
        self._limiter = (
            SlidingWindowRateLimiter(profile.rate_limit_per_min, self.clock)
            if profile.rate_limit_per_min
            else None
        )

    def close(self) -> None:
        self._client.close()

    def _post(self, path: str, payload: dict, stream: bool = False) -> httpx.Response:
        if self._limiter:
            self._limiter.acquire()
        last_error: Exception | None = None
        for attempt in range(self.profile.max_retries + 1):
            if attempt > 0:
                # Deterministic bounded backoff: 0.1, 0.2, 0.4 ... capped at 2 s.
                self.clock.sleep(min(0.1 * 2 ** (attempt - 1), 2.0))
            try:
                req = self._client.build_request("POST", path, json=payload)
                resp = self._client.send(req, stream=stream)
            except httpx.TransportError as exc:  # timeouts, refused connections, resets
                last_error = exc
                continue
            if resp.status_code >= 500:
                body = resp.read().decode("utf-8", "replace")
                resp.close()
                last_error = BackendError(
                    f"server error {resp.status_code}", body=body, retryable=True
                )
                continue
            if resp.status_code >= 400:
                body = resp.read().decode("utf-8", "replace")
                resp.close()
                raise BackendError(f"backend rejected request ({resp.status_code})", body=body)
            return resp
        raise BackendError(
            f"backend gave no usable response after {self.profile.max_retries + 1} attempts: "
            f"{last_error}",
            body=getattr(last_error, "body", None),
            retryable=True,
            unreachable=isinstance(last_error, httpx.TransportError),
        )

    def _context_messages(self, context: ContextPack) -> list[dict]:
        messages = []
        for seg in context.segments:
            if seg.modality == "text" and seg.text:
                messages.append({"role": "user", "content": seg.text})
            elif seg.media_id:
                messages.append(
                    {"role": "user", "content": f"[{seg.modality}:{seg.media_id}]"}
                )
        return messages

    def stream_text(self, req: GenerationRequest) -> Iterator[str]:
        payload = {
            "model": self.profile.model_name,
            "messages": self._context_messages(req.context),
            "stream": True,
            "temperature": self.profile.temperature,
            "top_p": self.profile.top_p,
        }
        if req.style:
            payload["style"] = req.style
        resp = self._post("/chat/completions", payload, stream=True)
        try:
            for line in resp.iter_lines():
                if not line.startswith("data:"):
                    continue
                data = line[len("data:") :].strip()
                if data == "[DONE]":
                    break
                try:
                    piece = json.loads(data)["choices"][0]["delta"].get("content")
                except (KeyError, IndexError, json.JSONDecodeError) as exc:
                    raise BackendError(f"malformed stream chunk: {data[:200]}", body=data) from exc
                if piece:
                    yield piece
        finally:
            resp.close()

    def stream_speech(
        self, text_group: Sequence[str], conditioning: ConditioningHandle, final: bool
    ) -> list[int]:
        payload = {
            "model": self.profile.model_name,
            "text_tokens": list(text_group),
            "conditioning": json.loads(conditioning.to_json()),
            "final": final,
        }
        resp = self._post("/speech/tokens", payload)
        body = resp.json()
        tokens = body.get("tokens")
        if not isinstance(tokens, list):
            raise BackendError("speech endpoint returned no token list", body=resp.text)
        return [int(t) for t in tokens]

    def judge(self, prompt: str, media: Sequence[JudgeMedia] = ()) -> str:
        content: list[dict] = [{"type": "text", "text": prompt}]
        for m in media:
            b64 = base64.b64encode(m.data).decode("ascii")
            if m.kind == "image":
                content.append(
                    {"type": "image_url", "image_url": {"url": f"data:{m.mime};base64,{b64}"}}
                )
            else:
                content.append({"type": "input_audio", "input_audio": {"data": b64, "format": "wav"}})
        payload = {
            "model": self.profile.model_name,
            "messages": [{"role": "user", "content": content}],
            "stream": False,
            "temperature": self.profile.temperature,
            "top_p": self.profile.top_p,
        }
        resp = self._post("/chat/completions", payload)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, json.JSONDecodeError) as exc:
            # Surface the raw body; the parse stage reports it as unscored.
            raise BackendError("malformed judge response", body=resp.text) from exc


def make_backend(
    profile: BackendProfile,
    transport: httpx.BaseTransport | None = None,
    clock: Clock | None = None,
) -> Backend:
    if profile.kind == "toy":
        return ToyBackend(profile)
    return RemoteBackend(profile, transport=transport, clock=clock)
