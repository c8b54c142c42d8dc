"""Benchmark item schemas, validation, loading, and synthetic fixtures."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..errors import ValidationError

ITEM_SCHEMA_VERSION = 1

MEMORY_TYPES = ("TextMemory", "ImageMemory", "MixedMemory")
MSIB_DIMENSIONS = (
    "BasicConversation",
    "EmotionalExpression",
    "RateControl",
    "RolePlaying",
    "CreativeCapacity",
    "InstructionFollowing",
)
MAX_HISTORY_TURNS = 15
MSIB_MIN_TURNS, MSIB_MAX_TURNS = 2, 10


@dataclass(frozen=True)
class HistoryTurn:
    role: str  # "user" | "assistant"
    text: str
    images: tuple[str, ...] = ()  # media ids introduced in this turn

    def to_dict(self) -> dict:
        return {"role": self.role, "text": self.text, "images": list(self.images)}

    @classmethod
    def from_dict(cls, d: dict) -> "HistoryTurn":
        return cls(role=d["role"], text=d["text"], images=tuple(d.get("images", ())))


@dataclass(frozen=True)
class MMMBItem:
    group_id: str
    turns: tuple[HistoryTurn, ...]
    final_question: str
    memory_type: str
    reference_answer: str
    referent_turns: tuple[int, ...]
    num_memorized_images: int

    @property
    def final_question_index(self) -> int:
        # History turns occupy indices 0..len-1; the question follows them.
        return len(self.turns)

    @property
    def turn_distance(self) -> int:
        return self.final_question_index - max(self.referent_turns)

    def validate(self) -> None:
        if not self.turns:
            raise ValidationError(f"{self.group_id}: history must not be empty")
        if len(self.turns) > MAX_HISTORY_TURNS:
            raise ValidationError(
                f"{self.group_id}: history has {len(self.turns)} turns, max {MAX_HISTORY_TURNS}"
            )
        if self.memory_type not in MEMORY_TYPES:
            raise ValidationError(f"{self.group_id}: unknown memory type {self.memory_type!r}")
        if not self.referent_turns:
            raise ValidationError(f"{self.group_id}: no referent turns")
        if any(not 0 <= r < len(self.turns) for r in self.referent_turns):
            raise ValidationError(f"{self.group_id}: referent index out of range")
        referent_images = set()
        image_bearing = 0
        for r in self.referent_turns:
            imgs = self.turns[r].images
            referent_images.update(imgs)
            if imgs:
                image_bearing += 1
        if self.memory_type == "TextMemory" and referent_images:
            raise ValidationError(f"{self.group_id}: TextMemory referents must carry no images")
        if self.memory_type == "ImageMemory" and image_bearing != len(self.referent_turns):
            raise ValidationError(f"{self.group_id}: ImageMemory referents must all carry images")
        if self.memory_type == "MixedMemory":
            if image_bearing == 0 or image_bearing == len(self.referent_turns):
                raise ValidationError(
                    f"{self.group_id}: MixedMemory needs image-bearing and image-free referents"
                )
        if self.num_memorized_images != len(referent_images):
            raise ValidationError(
                f"{self.group_id}: num_memorized_images={self.num_memorized_images} "
                f"but referents carry {len(referent_images)} distinct images"
            )

    def to_dict(self) -> dict:
        return {
            "schema_version": ITEM_SCHEMA_VERSION,
            "group_id": self.group_id,
            "turns": [t.to_dict() for t in self.turns],
            "final_question": self.final_question,
            "memory_type": self.memory_type,
            "reference_answer": self.reference_answer,
            "referent_turns": list(self.referent_turns),
            "num_memorized_images": self.num_memorized_images,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MMMBItem":
        return cls(
            group_id=d["group_id"],
            turns=tuple(HistoryTurn.from_dict(t) for t in d["turns"]),
            final_question=d["final_question"],
            memory_type=d["memory_type"],
            reference_answer=d["reference_answer"],
            referent_turns=tuple(d["referent_turns"]),
            num_memorized_images=d["num_memorized_images"],
        )


@dataclass(frozen=True)
class MSIBItem:
    item_id: str
    dimension: str
    turns: tuple[HistoryTurn, ...]  # full dialogue; the last turn is evaluated
    background_text: str

    def validate(self) -> None:
        if self.dimension not in MSIB_DIMENSIONS:
            raise ValidationError(f"{self.item_id}: unknown dimension {self.dimension!r}")
        if not MSIB_MIN_TURNS <= len(self.turns) <= MSIB_MAX_TURNS:
            raise ValidationError(
                f"{self.item_id}: dialogue must have {MSIB_MIN_TURNS}-{MSIB_MAX_TURNS} turns, "
                f"got {len(self.turns)}"
            )

    def to_dict(self) -> dict:
        return {
            "schema_version": ITEM_SCHEMA_VERSION,
            "item_id": self.item_id,
            "dimension": self.dimension,
            "turns": [t.to_dict() for t in self.turns],
            "background_text": self.background_text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MSIBItem":
        return cls(
            item_id=d["item_id"],
            dimension=d["dimension"],
            turns=tuple(HistoryTurn.from_dict(t) for t in d["turns"]),
            background_text=d["background_text"],
        )


def _load_jsonl(path: str | Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield lineno, json.loads(line)


def load_mmmb_items(path: str | Path) -> list[MMMBItem]:
    items = []
    for lineno, doc in _load_jsonl(path):
        try:
            item = MMMBItem.from_dict(doc)
            item.validate()
        except (KeyError, ValidationError, TypeError) as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
        items.append(item)
    return items


def load_msib_items(path: str | Path) -> list[MSIBItem]:
    items = []
    for lineno, doc in _load_jsonl(path):
        try:
            item = MSIBItem.from_dict(doc)
            item.validate()
        except (KeyError, ValidationError, TypeError) as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
        items.append(item)
    return items


def write_items(items: Iterable[MMMBItem | MSIBItem], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
            n += 1
    return n


# ---------------------------------------------------------------------------
# Synthetic fixtures

_TOPICS = (
    ("a red bicycle", "red"),
    ("three green apples", "three"),
    ("a wooden chess board", "wooden"),
    ("the 1969 moon landing", "1969"),
    ("a blue ceramic teapot", "blue"),
    ("a map of the silk road", "silk"),
    ("two chrome spoons", "two"),
    ("an origami crane", "origami"),
)


def make_synthetic_mmmb(
    n: int = 300, seed: int = 0, echo_answers: bool = False
) -> list[MMMBItem]:
    """Deterministic items shaped like the benchmark: <=15 history turns,
    progressive image/text introduction, and a final question whose answer
    lives in specific historical turns.

    With ``echo_answers`` the final question embeds an ECHO marker so the toy
    text backend reproduces the reference answer end to end.
    """
    rng = random.Random(seed)
    items = []
    for k in range(n):
        memory_type = MEMORY_TYPES[k % len(MEMORY_TYPES)]
        # History capped at 14 so history plus the final question stays
        # within a 15-turn group.
        n_history = rng.randint(4, MAX_HISTORY_TURNS - 1)
        turns = []
        image_turns = []
        for i in range(n_history):
            topic, _ = _TOPICS[rng.randrange(len(_TOPICS))]
            with_image = rng.random() < 0.5
            images = (f"g{k:04d}-img{i}",) if with_image else ()
            role = "user" if i % 2 == 0 else "assistant"
            turns.append(
                HistoryTurn(role=role, text=f"turn {i} mentions {topic}", images=images)
            )
            if with_image:
                image_turns.append(i)
        text_turns = [i for i in range(n_history) if i not in image_turns]
        # Guarantee at least one turn of each modality for referent selection.
        if not image_turns:
            turns[0] = HistoryTurn(role=turns[0].role, text=turns[0].text, images=(f"g{k:04d}-img0",))
            image_turns = [0]
            text_turns = [i for i in text_turns if i != 0]
        if not text_turns:
            turns[1] = HistoryTurn(role=turns[1].role, text=turns[1].text, images=())
            image_turns = [i for i in image_turns if i != 1]
            text_turns = [1]
        if memory_type == "TextMemory":
            referents = (rng.choice(text_turns),)
        elif memory_type == "ImageMemory":
            count = min(len(image_turns), rng.randint(1, 3))
            referents = tuple(sorted(rng.sample(image_turns, count)))
        else:
            referents = tuple(sorted((rng.choice(image_turns), rng.choice(text_turns))))
        distinct_images = {img for r in referents for img in turns[r].images}
        reference = f"answer-{k:04d}"
        final_question = f"What was established at {', '.join(f'turn {r}' for r in referents)}?"
        if echo_answers:
            final_question += f"\nECHO:{reference}"
        items.append(
            MMMBItem(
                group_id=f"g{k:04d}",
                turns=tuple(turns),
                final_question=final_question,
                memory_type=memory_type,
                reference_answer=reference,
                referent_turns=referents,
                num_memorized_images=len(distinct_images),
            )
        )
    return items


def make_synthetic_msib(n: int = 24, seed: int = 0) -> list[MSIBItem]:
    rng = random.Random(seed)
    items = []
    for k in range(n):
        dimension = MSIB_DIMENSIONS[k % len(MSIB_DIMENSIONS)]
        n_turns = rng.randint(MSIB_MIN_TURNS, MSIB_MAX_TURNS)
        turns = []
        for i in range(n_turns):
            role = "user" if i % 2 == 0 else "assistant"
            turns.append(HistoryTurn(role=role, text=f"{dimension} exchange {i}"))
        if turns[-1].role != "user":
            turns[-1] = HistoryTurn(role="user", text=f"{dimension} final request")
        items.append(
            MSIBItem(
                item_id=f"m{k:04d}",
                dimension=dimension,
                turns=tuple(turns),
                background_text=f"Scenario {k} probing {dimension}.",
            )
        )
    return items
