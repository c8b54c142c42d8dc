"""Multi-turn session state, per-turn token costing, and context assembly.

Sessions are immutable values: appending a turn returns a new state. Context
assembly packs whole turns newest-first under the token budget (32,768 by
default) and never evicts the current turn.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Protocol

from . import audio, vision
from .errors import CapacityError, ValidationError

DEFAULT_BUDGET_TOKENS = 32_768


class QuestionCategory(str, Enum):
    """The five question categories a dialogue turn can be planned as."""

    IMAGE_IRRELEVANT = "ImageIrrelevant"
    IMAGE_RELEVANT_CURRENT = "ImageRelevantCurrent"
    HISTORICAL_IMAGE_MEMORY = "HistoricalImageMemory"
    HISTORICAL_TEXT_MEMORY = "HistoricalTextMemory"
    HISTORICAL_IMAGE_TEXT_MEMORY = "HistoricalImageTextMemory"


MEMORY_CATEGORIES = frozenset(
    {
        QuestionCategory.HISTORICAL_IMAGE_MEMORY,
        QuestionCategory.HISTORICAL_TEXT_MEMORY,
        QuestionCategory.HISTORICAL_IMAGE_TEXT_MEMORY,
    }
)
IMAGE_MEMORY_CATEGORIES = frozenset(
    {QuestionCategory.HISTORICAL_IMAGE_MEMORY, QuestionCategory.HISTORICAL_IMAGE_TEXT_MEMORY}
)


class Tokenizer(Protocol):
    def tokenize(self, text: str) -> list[str]: ...

    def count(self, text: str) -> int: ...


class WhitespaceTokenizer:
    """Test tokenizer: tokens are whitespace-separated words."""

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    def count(self, text: str) -> int:
        return len(text.split())


@dataclass(frozen=True)
class ImageRef:
    """An image in a turn, identified by repository/content id plus dimensions."""

    media_id: str
    width_px: int
    height_px: int

    kind = "image"

    def token_count(self, max_tiles: int = vision.DEFAULT_MAX_TILES) -> int:
        meta = vision.ImageMeta(self.width_px, self.height_px)
        return vision.image_token_count(meta, max_tiles=max_tiles)


@dataclass(frozen=True)
class AudioRef:
    media_id: str
    duration_s: float

    kind = "audio"

    def token_count(self) -> int:
        return audio.audio_token_count(self.duration_s)


MediaRef = ImageRef | AudioRef


def media_ref_to_dict(ref: MediaRef) -> dict:
    if isinstance(ref, ImageRef):
        return {"kind": "image", "media_id": ref.media_id, "width_px": ref.width_px, "height_px": ref.height_px}
    return {"kind": "audio", "media_id": ref.media_id, "duration_s": ref.duration_s}


def media_ref_from_dict(d: dict) -> MediaRef:
    if d["kind"] == "image":
        return ImageRef(media_id=d["media_id"], width_px=d["width_px"], height_px=d["height_px"])
    if d["kind"] == "audio":
        return AudioRef(media_id=d["media_id"], duration_s=d["duration_s"])
    raise ValidationError(f"unknown media kind {d.get('kind')!r}")


@dataclass(frozen=True)
class Turn:
    index: int
    role: str  # "user" | "assistant"
    text: str
    media: tuple[MediaRef, ...] = ()
    category: QuestionCategory | None = None
    referent_turns: tuple[int, ...] = ()
    token_cost: int = 0

    def has_image(self) -> bool:
        return any(m.kind == "image" for m in self.media)


def turn_token_cost(
    text: str,
    media: tuple[MediaRef, ...] = (),
    tokenizer: Tokenizer | None = None,
    max_tiles: int = vision.DEFAULT_MAX_TILES,
) -> int:
    """Text tokens plus the visual/audio token cost of every media reference."""
    tok = tokenizer or WhitespaceTokenizer()
    cost = tok.count(text)
    for ref in media:
        if isinstance(ref, ImageRef):
            cost += ref.token_count(max_tiles=max_tiles)
        else:
            cost += ref.token_count()
    return cost


def make_turn(
    index: int,
    role: str,
    text: str,
    media: tuple[MediaRef, ...] = (),
    category: QuestionCategory | None = None,
    referent_turns: tuple[int, ...] = (),
    tokenizer: Tokenizer | None = None,
    max_tiles: int = vision.DEFAULT_MAX_TILES,
) -> Turn:
    """Build a turn with its token cost computed from the content."""
    return Turn(
        index=index,
        role=role,
        text=text,
        media=tuple(media),
        category=category,
        referent_turns=tuple(referent_turns),
        token_cost=turn_token_cost(text, tuple(media), tokenizer, max_tiles),
    )


@dataclass(frozen=True)
class SessionState:
    id: str
    turns: tuple[Turn, ...] = ()
    budget_tokens: int = DEFAULT_BUDGET_TOKENS

    def __post_init__(self) -> None:
        if self.budget_tokens <= 0:
            raise ValidationError(f"budget must be positive, got {self.budget_tokens}")
        for i, t in enumerate(self.turns):
            if t.index != i:
                raise ValidationError(f"turn indices must be contiguous; turn {i} has index {t.index}")


@dataclass(frozen=True)
class ContextSegment:
    turn_index: int
    modality: str  # "text" | "image" | "audio"
    token_span: int
    text: str | None = None
    media_id: str | None = None


@dataclass(frozen=True)
class ContextPack:
    segments: tuple[ContextSegment, ...]
    total_tokens: int
    evicted_turns: tuple[int, ...]
    budget_tokens: int = DEFAULT_BUDGET_TOKENS

    def text_content(self) -> str:
        return "\n".join(s.text for s in self.segments if s.modality == "text" and s.text)


def append_turn(s: SessionState, t: Turn, tokenizer: Tokenizer | None = None) -> SessionState:
    """Validate and append; the turn's token cost is recomputed from content."""
    if t.index != len(s.turns):
        raise ValidationError(f"expected turn index {len(s.turns)}, got {t.index}")
    for ref in t.referent_turns:
        if not (0 <= ref < t.index):
            raise ValidationError(f"turn {t.index} references nonexistent turn {ref}")
    cost = turn_token_cost(t.text, t.media, tokenizer)
    if cost > s.budget_tokens:
        raise CapacityError(
            f"turn costs {cost} tokens, above the session budget of {s.budget_tokens}"
        )
    t = replace(t, token_cost=cost)
    return replace(s, turns=s.turns + (t,))


def _turn_segments(t: Turn, tokenizer: Tokenizer) -> list[ContextSegment]:
    segs = [
        ContextSegment(
            turn_index=t.index, modality="text", token_span=tokenizer.count(t.text), text=t.text
        )
    ]
    for ref in t.media:
        segs.append(
            ContextSegment(
                turn_index=t.index, modality=ref.kind, token_span=ref.token_count(), media_id=ref.media_id
            )
        )
    return segs


def assemble_context(s: SessionState, tokenizer: Tokenizer | None = None) -> ContextPack:
    """Pack turns under the budget, whole-turn granularity, newest kept first.

    Walks history from the newest turn back, keeping turns while they fit;
    the kept set is emitted oldest-first. The last turn is always included
    (it alone exceeding the budget is a capacity error).
    """
    if not s.turns:
        raise ValidationError("cannot assemble context for an empty session")
    tok = tokenizer or WhitespaceTokenizer()
    last = s.turns[-1]
    if last.token_cost > s.budget_tokens:
        raise CapacityError(
            f"current turn costs {last.token_cost} tokens, above budget {s.budget_tokens}"
        )
    kept: list[Turn] = []
    total = 0
    for t in reversed(s.turns):
        if total + t.token_cost > s.budget_tokens:
            break
        kept.append(t)
        total += t.token_cost
    kept.reverse()
    kept_indices = {t.index for t in kept}
    evicted = tuple(t.index for t in s.turns if t.index not in kept_indices)
    segments: list[ContextSegment] = []
    for t in kept:
        segments.extend(_turn_segments(t, tok))
    return ContextPack(
        segments=tuple(segments),
        total_tokens=total,
        evicted_turns=evicted,
        budget_tokens=s.budget_tokens,
    )


def turn_distance(s: SessionState, referent: int, question: int) -> int:
    """Index gap between a historical evidence turn and the question turn."""
    n = len(s.turns)
    if not (0 <= referent < n) or not (0 <= question < n):
        raise ValidationError(f"turn index out of range for session of {n} turns")
    if referent >= question:
        raise ValidationError(f"referent turn {referent} must precede question turn {question}")
    return question - referent
