"""Multi-turn dialogue construction: sample media, schedule question categories,
render prompts, generate Q/A pairs through a backend, and optionally voice them.

Memory-probing turns are only scheduled once a qualifying referent exists in
the history (an image-bearing turn for image memory, any earlier turn for text
memory); when a weighted mix cannot start legally, a setup turn is forced in.
Records serialize one-per-line with a versioned schema and media by repository
id, and regenerate byte-identically for a fixed (spec, repo, toy backend).
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from PIL import Image

from .backends import Backend, GenerationRequest, stable_hash
from .errors import ConfigError, GenerationError, PlanningError, ValidationError
from .interleave import ToyVocoder
from .session import (
    ContextPack,
    ContextSegment,
    IMAGE_MEMORY_CATEGORIES,
    MEMORY_CATEGORIES,
    QuestionCategory,
    WhitespaceTokenizer,
)

RECORD_SCHEMA_VERSION = 1
REPO_SCHEMA_VERSION = 1
MAX_TURNS = 20
VIDEO_FRAME_COUNT = 8  # frames charged per sampled video entry

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".webp", ".bmp", ".gif"}
VIDEO_EXTENSIONS = {".mp4", ".avi", ".mov", ".mkv", ".webm"}

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Media repository

@dataclass(frozen=True)
class RepoEntry:
    id: str
    kind: str  # "image" | "video"
    path: str  # relative to the repository root
    tags: tuple[str, ...] = ()
    width_px: int | None = None
    height_px: int | None = None


@dataclass(frozen=True)
class MediaRepository:
    root: Path
    entries: tuple[RepoEntry, ...]

    def __post_init__(self) -> None:
        seen = set()
        for e in self.entries:
            if e.id in seen:
                raise ValidationError(f"duplicate media id {e.id!r}")
            seen.add(e.id)
            if not (self.root / e.path).exists():
                raise ValidationError(f"indexed media path missing: {e.path}")

    def get(self, media_id: str) -> RepoEntry:
        for e in self.entries:
            if e.id == media_id:
                return e
        raise ValidationError(f"unknown media id {media_id!r}")

    @property
    def images(self) -> list[RepoEntry]:
        return [e for e in self.entries if e.kind == "image"]

    @classmethod
    def scan(cls, root: str | Path) -> "MediaRepository":
        """Index a directory by file extension; image dimensions are recorded."""
        root = Path(root)
        entries = []
        for p in sorted(root.rglob("*")):
            if not p.is_file():
                continue
            ext = p.suffix.lower()
            rel = str(p.relative_to(root))
            if ext in IMAGE_EXTENSIONS:
                with Image.open(p) as img:
                    w, h = img.size
                entries.append(RepoEntry(id=p.stem, kind="image", path=rel, width_px=w, height_px=h))
            elif ext in VIDEO_EXTENSIONS:
                entries.append(RepoEntry(id=p.stem, kind="video", path=rel))
        return cls(root=root, entries=tuple(entries))

    @classmethod
    def load(cls, root: str | Path) -> "MediaRepository":
        """Load root/index.json if present, otherwise scan the directory."""
        root = Path(root)
        index = root / "index.json"
        if not index.exists():
            return cls.scan(root)
        doc = json.loads(index.read_text())
        entries = tuple(
            RepoEntry(
                id=e["id"],
                kind=e["kind"],
                path=e["path"],
                tags=tuple(e.get("tags", ())),
                width_px=e.get("width_px"),
                height_px=e.get("height_px"),
            )
            for e in doc["entries"]
        )
        return cls(root=root, entries=entries)

    def save_index(self) -> None:
        doc = {
            "schema_version": REPO_SCHEMA_VERSION,
            "entries": [
                {
                    "id": e.id,
                    "kind": e.kind,
                    "path": e.path,
                    "tags": list(e.tags),
                    "width_px": e.width_px,
                    "height_px": e.height_px,
                }
                for e in self.entries
            ],
        }
        (self.root / "index.json").write_text(json.dumps(doc, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# Dialogue spec and schedule planning

@dataclass(frozen=True)
class DialogueSpec:
    num_turns: int
    category_mix: dict[QuestionCategory, float]
    seed: int = 0
    voice: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.num_turns <= MAX_TURNS:
            raise ValidationError(f"num_turns must be 1..{MAX_TURNS}, got {self.num_turns}")
        if any(w < 0 for w in self.category_mix.values()):
            raise ValidationError("category weights must be non-negative")
        if not any(w > 0 for w in self.category_mix.values()):
            raise ValidationError("at least one category weight must be positive")

    def to_dict(self) -> dict:
        return {
            "num_turns": self.num_turns,
            "category_mix": {c.value: w for c, w in self.category_mix.items()},
            "seed": self.seed,
            "voice": self.voice,
        }


def uniform_mix() -> dict[QuestionCategory, float]:
    return {c: 1.0 for c in QuestionCategory}


def _feasible(category: QuestionCategory, turn_idx: int, image_turns: list[int]) -> bool:
    if category in IMAGE_MEMORY_CATEGORIES:
        return bool(image_turns)
    if category == QuestionCategory.HISTORICAL_TEXT_MEMORY:
        return turn_idx > 0
    return True


def plan_schedule(spec: DialogueSpec) -> list[QuestionCategory]:
    """Seeded category schedule of length num_turns.

    Memory categories are placed only where a qualifying referent already
    exists. When no weighted category is feasible at a position, a setup turn
    is inserted (image-introducing if the mix needs image memory). If the
    finished schedule contains no weighted category at all, the mix was
    infeasible and a PlanningError is raised.
    """
    rng = random.Random(spec.seed)
    weighted = [c for c, w in spec.category_mix.items() if w > 0]
    needs_image = any(c in IMAGE_MEMORY_CATEGORIES for c in weighted)
    schedule: list[QuestionCategory] = []
    image_turns: list[int] = []
    used_mix = False
    for i in range(spec.num_turns):
        feasible = [c for c in weighted if _feasible(c, i, image_turns)]
        if feasible:
            weights = [spec.category_mix[c] for c in feasible]
            choice = rng.choices(feasible, weights=weights, k=1)[0]
            used_mix = True
        else:
            choice = (
                QuestionCategory.IMAGE_RELEVANT_CURRENT
                if needs_image
                else QuestionCategory.IMAGE_IRRELEVANT
            )
        schedule.append(choice)
        if choice == QuestionCategory.IMAGE_RELEVANT_CURRENT:
            image_turns.append(i)
    if not used_mix:
        raise PlanningError(
            f"no feasible placement for any weighted category within {spec.num_turns} turns"
        )
    return schedule


class MediaSampler:
    """Seeded sampling from the repository, without replacement per dialogue."""

    def __init__(self, repo: MediaRepository, seed: int):
        self.repo = repo
        self.rng = random.Random(seed ^ 0x5EED)
        self.used: set[str] = set()

    def sample(self, category: QuestionCategory, turn_idx: int) -> RepoEntry | None:
        if category != QuestionCategory.IMAGE_RELEVANT_CURRENT:
            return None
        available = [e for e in self.repo.entries if e.id not in self.used]
        if not available:
            raise GenerationError(
                f"media repository exhausted at turn {turn_idx} "
                f"({len(self.repo.entries)} entries, all used)"
            )
        entry = available[self.rng.randrange(len(available))]
        self.used.add(entry.id)
        return entry


def sample_visual(
    repo: MediaRepository,
    category: QuestionCategory,
    seed: int,
    turn_idx: int,
    used: Iterable[str] = (),
) -> RepoEntry | None:
    """Single-shot form of MediaSampler for callers tracking their own state."""
    sampler = MediaSampler(repo, seed)
    sampler.used = set(used)
    return sampler.sample(category, turn_idx)


# ---------------------------------------------------------------------------
# Question templates

@dataclass(frozen=True)
class TemplateSet:
    version: str
    by_category: dict[QuestionCategory, str]

    @classmethod
    def load(cls, directory: str | Path) -> "TemplateSet":
        directory = Path(directory)
        version_file = directory / "VERSION"
        version = version_file.read_text().strip() if version_file.exists() else directory.name
        by_category: dict[QuestionCategory, str] = {}
        for p in sorted(directory.glob("*.txt")):
            try:
                cat = QuestionCategory(p.stem)
            except ValueError:
                raise ConfigError(f"template file {p.name} does not match a question category")
            by_category[cat] = p.read_text()
        return cls(version=version, by_category=by_category)

    @classmethod
    def default(cls) -> "TemplateSet":
        base = resources.files("omni") / "templates" / "question" / "v1"
        return cls.load(Path(str(base)))


def media_marker(entry: RepoEntry) -> str:
    if entry.kind == "video":
        return f"[video {entry.id}: {VIDEO_FRAME_COUNT} frames]"
    return f"[image {entry.id}]"


def entry_media_refs(entry: RepoEntry):
    """Session media references for one repository entry.

    Images carry their real dimensions; a video contributes VIDEO_FRAME_COUNT
    uniformly sampled frames, each normalized to a single 448x448 tile.
    """
    from .session import ImageRef

    if entry.kind == "image":
        w = entry.width_px or 448
        h = entry.height_px or 448
        return (ImageRef(media_id=entry.id, width_px=w, height_px=h),)
    return tuple(
        ImageRef(media_id=f"{entry.id}#frame{i}", width_px=448, height_px=448)
        for i in range(VIDEO_FRAME_COUNT)
    )


def render_question(
    category: QuestionCategory,
    history: "ContextPack | None",
    media: RepoEntry | None,
    templates: TemplateSet,
    referents: tuple[int, ...] = (),
) -> str:
    """Fill the category's template with referent citations and media markers."""
    template = templates.by_category.get(category)
    if template is None:
        raise ConfigError(f"no template for category {category.value}")
    citation = ", ".join(f"turn {r}" for r in referents)
    marker = media_marker(media) if media else ""
    prompt = template.replace("{referent_citation}", citation).replace("{media_marker}", marker)
    if category in MEMORY_CATEGORIES and not referents:
        raise ValidationError(f"{category.value} question rendered without referents")
    return prompt


# ---------------------------------------------------------------------------
# Dialogue records

@dataclass(frozen=True)
class AudioRendition:
    audio_id: str
    duration_s: float
    sample_rate: int


@dataclass(frozen=True)
class DialogueTurn:
    index: int
    category: QuestionCategory
    question: str
    answer: str
    media_id: str | None = None
    media_kind: str | None = None
    referents: tuple[int, ...] = ()
    question_audio: AudioRendition | None = None
    audio_flag: str | None = None

    def has_image(self) -> bool:
        return self.media_id is not None


@dataclass(frozen=True)
class DialogueRecord:
    id: str
    turns: tuple[DialogueTurn, ...]
    schedule: tuple[QuestionCategory, ...]
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": RECORD_SCHEMA_VERSION,
            "id": self.id,
            "schedule": [c.value for c in self.schedule],
            "turns": [
                {
                    "index": t.index,
                    "category": t.category.value,
                    "question": t.question,
                    "answer": t.answer,
                    "media_id": t.media_id,
                    "media_kind": t.media_kind,
                    "referents": list(t.referents),
                    "question_audio": (
                        {
                            "audio_id": t.question_audio.audio_id,
                            "duration_s": t.question_audio.duration_s,
                            "sample_rate": t.question_audio.sample_rate,
                        }
                        if t.question_audio
                        else None
                    ),
                    "audio_flag": t.audio_flag,
                }
                for t in self.turns
            ],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DialogueRecord":
        if d.get("schema_version") != RECORD_SCHEMA_VERSION:
            raise ValidationError(f"unsupported record schema {d.get('schema_version')}")
        turns = tuple(
            DialogueTurn(
                index=t["index"],
                category=QuestionCategory(t["category"]),
                question=t["question"],
                answer=t["answer"],
                media_id=t.get("media_id"),
                media_kind=t.get("media_kind"),
                referents=tuple(t.get("referents", ())),
                question_audio=(
                    AudioRendition(
                        audio_id=t["question_audio"]["audio_id"],
                        duration_s=t["question_audio"]["duration_s"],
                        sample_rate=t["question_audio"]["sample_rate"],
                    )
                    if t.get("question_audio")
                    else None
                ),
                audio_flag=t.get("audio_flag"),
            )
            for t in d["turns"]
        )
        return cls(
            id=d["id"],
            turns=turns,
            schedule=tuple(QuestionCategory(c) for c in d["schedule"]),
            provenance=d["provenance"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


def validate_record(rec: DialogueRecord) -> None:
    """Raise ValidationError unless every structural invariant holds."""
    if len(rec.schedule) != len(rec.turns):
        raise ValidationError("schedule length differs from turn count")
    if len(rec.turns) > MAX_TURNS:
        raise ValidationError(f"dialogue exceeds {MAX_TURNS} turns")
    media_seen: set[str] = set()
    image_turns: set[int] = set()
    for t in rec.turns:
        if t.category != rec.schedule[t.index]:
            raise ValidationError(f"turn {t.index} category differs from schedule")
        if any(r >= t.index or r < 0 for r in t.referents):
            raise ValidationError(f"turn {t.index} has a non-preceding referent")
        if t.media_id is not None:
            if t.media_id in media_seen:
                raise ValidationError(f"media {t.media_id} reused within one dialogue")
            media_seen.add(t.media_id)
            image_turns.add(t.index)
        if t.category in MEMORY_CATEGORIES and not t.referents:
            raise ValidationError(f"memory turn {t.index} has no referents")
        if t.category in IMAGE_MEMORY_CATEGORIES:
            if not any(r in image_turns for r in t.referents):
                raise ValidationError(f"turn {t.index} needs an image-bearing referent")


def write_records(records: Iterable[DialogueRecord], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
            n += 1
    return n


def read_records(path: str | Path) -> Iterator[DialogueRecord]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield DialogueRecord.from_dict(json.loads(line))


# ---------------------------------------------------------------------------
# Construction pipeline

def _history_segments(turns: list[DialogueTurn]) -> list[ContextSegment]:
    tok = WhitespaceTokenizer()
    segs = []
    for t in turns:
        text = f"turn {t.index} question: {t.question}\nturn {t.index} answer: {t.answer}"
        segs.append(
            ContextSegment(turn_index=t.index, modality="text", token_span=tok.count(text), text=text)
        )
    return segs


def _prompt_pack(history: list[DialogueTurn], prompt: str) -> ContextPack:
    tok = WhitespaceTokenizer()
    segs = _history_segments(history)
    segs.append(
        ContextSegment(
            turn_index=len(history), modality="text", token_span=tok.count(prompt), text=prompt
        )
    )
    total = sum(s.token_span for s in segs)
    return ContextPack(segments=tuple(segs), total_tokens=total, evicted_turns=())


def _generate_text(backend: Backend, pack: ContextPack) -> str:
    return " ".join(backend.stream_text(GenerationRequest(context=pack)))


def build_dialogue(
    repo: MediaRepository,
    spec: DialogueSpec,
    generator: Backend,
    templates: TemplateSet | None = None,
    tts: "ToyTTS | None" = None,
    audio_dir: str | Path | None = None,
) -> DialogueRecord:
    """Run plan -> sample -> render -> generate for every turn.

    Fully reproducible for a fixed (spec, repo snapshot, toy backend): the
    record id is derived from the spec, and no wall-clock state is recorded.
    """
    templates = templates or TemplateSet.default()
    schedule = plan_schedule(spec)
    sampler = MediaSampler(repo, spec.seed)
    referent_rng = random.Random(spec.seed + 101)
    turns: list[DialogueTurn] = []
    for i, category in enumerate(schedule):
        entry = sampler.sample(category, i)
        referents = _pick_referents(category, turns, referent_rng)
        prompt = render_question(category, None, entry, templates, referents)
        try:
            question = _generate_text(generator, _prompt_pack(turns, prompt))
            answer_prompt = f"Answer briefly.\nquestion: {question}"
            answer = _generate_text(generator, _prompt_pack(turns, answer_prompt))
        except Exception as exc:
            logger.error("discarding partial dialogue %s: backend failed at turn %d: %s",
                         spec.seed, i, exc)
            raise GenerationError(f"backend failed at turn {i}: {exc}") from exc
        turns.append(
            DialogueTurn(
                index=i,
                category=category,
                question=question,
                answer=answer,
                media_id=entry.id if entry else None,
                media_kind=entry.kind if entry else None,
                referents=referents,
            )
        )
    rec = DialogueRecord(
        id=f"dlg-{spec.seed}-{stable_hash(json.dumps(spec.to_dict(), sort_keys=True)):016x}",
        turns=tuple(turns),
        schedule=tuple(schedule),
        provenance={
            "spec": spec.to_dict(),
            "seed": spec.seed,
            "generator": generator.profile.model_name,
            "template_version": templates.version,
        },
    )
    if spec.voice:
        rec = voice_dialogue(rec, tts or ToyTTS(), out_dir=audio_dir)
    validate_record(rec)
    return rec


def _pick_referents(
    category: QuestionCategory, turns: list[DialogueTurn], rng: random.Random
) -> tuple[int, ...]:
    if category not in MEMORY_CATEGORIES:
        return ()
    image_candidates = [t.index for t in turns if t.has_image()]
    text_candidates = [t.index for t in turns]
    if category == QuestionCategory.HISTORICAL_TEXT_MEMORY:
        return (rng.choice(text_candidates),)
    if category == QuestionCategory.HISTORICAL_IMAGE_MEMORY:
        return (rng.choice(image_candidates),)
    # Image+text memory: an image referent plus a distinct text referent when available.
    img = rng.choice(image_candidates)
    others = [i for i in text_candidates if i != img]
    if others:
        return tuple(sorted((img, rng.choice(others))))
    return (img,)


# ---------------------------------------------------------------------------
# Voicing

class ToyTTS:
    """Deterministic question voicing: one 40 ms tone per whitespace token."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.vocoder = ToyVocoder()
        self.sample_rate = self.vocoder.sample_rate

    def synthesize_text(self, text: str):
        tokens = text.split()
        if not tokens:
            raise GenerationError("cannot voice empty text")
        ids = [stable_hash(f"{self.seed}|{i}|{tok}") % 600 for i, tok in enumerate(tokens)]
        return self.vocoder.synthesize(ids)


def voice_dialogue(
    rec: DialogueRecord,
    tts: ToyTTS,
    out_dir: str | Path | None = None,
) -> DialogueRecord:
    """Attach an audio rendition to each user question; text stays verbatim.

    Already-voiced turns are left untouched (voicing is idempotent); empty
    questions and per-turn TTS failures are flagged and skipped.
    """
    from . import audio as audiolib

    voiced = []
    for t in rec.turns:
        if t.question_audio is not None:
            voiced.append(t)
            continue
        if not t.question.strip():
            voiced.append(replace(t, audio_flag="skipped-empty-text"))
            continue
        try:
            samples = tts.synthesize_text(t.question)
        except Exception as exc:  # noqa: BLE001 - per-turn fault isolation
            logger.warning("voicing failed for turn %d of %s: %s", t.index, rec.id, exc)
            voiced.append(replace(t, audio_flag=f"tts-error: {exc}"))
            continue
        audio_id = f"{stable_hash(samples.tobytes()):016x}"
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            audiolib.write_wav(
                out / f"{audio_id}.wav",
                audiolib.Waveform(samples=samples, sample_rate=tts.sample_rate),
            )
        rendition = AudioRendition(
            audio_id=audio_id,
            duration_s=len(samples) / tts.sample_rate,
            sample_rate=tts.sample_rate,
        )
        voiced.append(replace(t, question_audio=rendition))
    return replace(rec, turns=tuple(voiced))
