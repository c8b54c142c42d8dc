"""Strictly alternating text/speech streaming: 5 text tokens, then 25 speech tokens.

The scheduler pulls text tokens in groups of five and hands each group (plus
an opaque conditioning handle) to a speech source, which answers with up to
25 speech tokens. A trailing partial text group is flushed as a final text
chunk and still triggers exactly one final speech request, so all text gets
voiced. Speech chunks are rendered to PCM by a vocoder backend; the toy
vocoder emits a 40 ms sine tone per token at 24 kHz.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Iterator, Protocol, Sequence

import numpy as np

from .errors import InputError, ProtocolError

TEXT_GROUP_SIZE = 5
SPEECH_GROUP_SIZE = 25
TOY_VOCODER_RATE = 24_000
TOY_SECONDS_PER_TOKEN = 0.040


class FrameKind(str, Enum):
    TEXT = "text"
    SPEECH = "speech"


@dataclass(frozen=True)
class ConditioningHandle:
    """Opaque reference to the text-side hidden state plus any style tags.

    Backends treat ``ref`` as an identity key; ``style_tags`` are forwarded
    verbatim and interpreted (or ignored) by the speech side.
    """

    ref: str
    style_tags: tuple[str, ...] = ()

    def to_json(self) -> str:
        return json.dumps({"ref": self.ref, "style_tags": list(self.style_tags)}, sort_keys=True)

    @classmethod
    def from_json(cls, raw: str) -> "ConditioningHandle":
        d = json.loads(raw)
        return cls(ref=d["ref"], style_tags=tuple(d["style_tags"]))


def apply_style(conditioning: ConditioningHandle, style_instruction: str) -> ConditioningHandle:
    """Record a style instruction on the handle; empty instructions are no-ops."""
    if not style_instruction:
        return conditioning
    return replace(conditioning, style_tags=conditioning.style_tags + (style_instruction,))


@dataclass(frozen=True)
class InterleaveFrame:
    seq: int
    kind: FrameKind
    tokens: tuple[int | str, ...]
    conditioning: ConditioningHandle
    final: bool = False


@dataclass(frozen=True)
class StreamError:
    """Terminal error frame: emitted once, then the stream ends."""

    seq: int
    message: str


# Speech source contract: (text_tokens, conditioning, final) -> speech token ids.
SpeechSource = Callable[[Sequence[str], ConditioningHandle, bool], Sequence[int]]


class _Peekable:
    def __init__(self, it: Iterable):
        self._it = iter(it)
        self._buf: list = []

    def peek_done(self) -> bool:
        if self._buf:
            return False
        try:
            self._buf.append(next(self._it))
            return False
        except StopIteration:
            return True

    def next(self):
        if self._buf:
            return self._buf.pop()
        return next(self._it)


def schedule(
    text_source: Iterable[str],
    speech_source: SpeechSource,
    conditioning: ConditioningHandle | None = None,
) -> Iterator[InterleaveFrame | StreamError]:
    """Interleave a text token stream with group-conditioned speech tokens.

    Yields alternating text/speech frames. Non-final text frames carry exactly
    5 tokens and non-final speech frames exactly 25; the final pair may be
    shorter. An empty text stream yields nothing. Speech-source exceptions
    become a single StreamError frame followed by termination.
    """
    cond = conditioning or ConditioningHandle(ref="stream")
    source = _Peekable(text_source)
    seq = 0
    while True:
        group: list[str] = []
        while len(group) < TEXT_GROUP_SIZE and not source.peek_done():
            group.append(source.next())
        if not group:
            return
        final = source.peek_done()
        yield InterleaveFrame(
            seq=seq, kind=FrameKind.TEXT, tokens=tuple(group), conditioning=cond, final=final
        )
        seq += 1
        try:
            speech_tokens = tuple(speech_source(group, cond, final))
        except Exception as exc:  # noqa: BLE001 - backend faults become stream errors
            yield StreamError(seq=seq, message=f"speech source failed: {exc}")
            return
        if not speech_tokens:
            raise ProtocolError("speech source returned an empty group for non-empty text")
        if len(speech_tokens) > SPEECH_GROUP_SIZE:
            raise ProtocolError(
                f"speech group of {len(speech_tokens)} exceeds the {SPEECH_GROUP_SIZE}-token ceiling"
            )
        if not final and len(speech_tokens) != SPEECH_GROUP_SIZE:
            raise ProtocolError(
                f"non-final speech group must have {SPEECH_GROUP_SIZE} tokens, got {len(speech_tokens)}"
            )
        yield InterleaveFrame(
            seq=seq, kind=FrameKind.SPEECH, tokens=speech_tokens, conditioning=cond, final=final
        )
        seq += 1
        if final:
            return


class Vocoder(Protocol):
    sample_rate: int

    def synthesize(self, tokens: Sequence[int], style_tags: Sequence[str] = ()) -> np.ndarray: ...


class ToyVocoder:
    """Deterministic token-to-waveform stub.

    Each token id renders as a 40 ms sine burst at 200 + 10*(id % 600) Hz,
    24 kHz mono. The "speak slowly" style tag halves the tone frequency;
    durations are style-independent so length accounting stays exact.
    """

    sample_rate = TOY_VOCODER_RATE

    def synthesize(self, tokens: Sequence[int], style_tags: Sequence[str] = ()) -> np.ndarray:
        if not tokens:
            raise InputError("cannot synthesize an empty token group")
        factor = 0.5 if "speak slowly" in style_tags else 1.0
        per_token = int(round(TOY_SECONDS_PER_TOKEN * self.sample_rate))
        t = np.arange(per_token) / self.sample_rate
        chunks = []
        for tok in tokens:
            freq = (200.0 + 10.0 * (int(tok) % 600)) * factor
            chunks.append(0.3 * np.sin(2.0 * np.pi * freq * t))
        return np.concatenate(chunks).astype(np.float32)


def synthesize_chunk(
    speech_tokens: Sequence[int],
    vocoder: Vocoder,
    conditioning: ConditioningHandle | None = None,
) -> np.ndarray:
    """Render one speech chunk (1-25 tokens) as float PCM at the vocoder's rate."""
    if not 1 <= len(speech_tokens) <= SPEECH_GROUP_SIZE:
        raise InputError(f"speech chunk must have 1-{SPEECH_GROUP_SIZE} tokens, got {len(speech_tokens)}")
    style = conditioning.style_tags if conditioning else ()
    return vocoder.synthesize(speech_tokens, style_tags=style)
