"""Speech interaction benchmark: run, aggregate per dimension, ingest MOS ratings.

The candidate answers only the final dialogue turn; the judge hears the
synthesized speech and reads the golden rubric prompt with the item's
background text substituted in. Aggregation mirrors the content / speech /
average row families, rounded half-up to two decimals.
"""

from __future__ import annotations

import csv
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Protocol, Sequence

from ..audio import pcm16_bytes
from ..backends import Backend, GenerationRequest, JudgeMedia
from ..dialogue import ToyTTS
from ..errors import BackendError, ConfigError, ValidationError, VerdictParseError
from ..session import ContextPack, ContextSegment, WhitespaceTokenizer
from .items import MSIB_DIMENSIONS, MSIBItem
from .judge import MSIB_PROMPT_VERSION, MSIBVerdict, parse_msib_verdict, render_judge_prompt
from .mmmb import BenchAborted


@dataclass(frozen=True)
class MSIBResponse:
    text: str
    audio_wav: bytes | None = None


@dataclass(frozen=True)
class MSIBVerdictRecord:
    item_id: str
    dimension: str
    verdict: MSIBVerdict | None
    judge_raw: str
    judge_model: str
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "dimension": self.dimension,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "judge_raw": self.judge_raw,
            "judge_model": self.judge_model,
            "error": self.error,
        }


class MSIBModel(Protocol):
    model_name: str

    def respond(self, item: MSIBItem) -> MSIBResponse: ...


class ScriptedSpeechModel:
    def __init__(self, fn: Callable[[MSIBItem], MSIBResponse], model_name: str = "scripted"):
        self._fn = fn
        self.model_name = model_name

    def respond(self, item: MSIBItem) -> MSIBResponse:
        return self._fn(item)


class BackendSpeechModel:
    """Generates the final-turn text with the backend, then voices it."""

    def __init__(self, backend: Backend, tts: ToyTTS | None = None):
        self.backend = backend
        self.tts = tts or ToyTTS()
        self.model_name = backend.profile.model_name

    def respond(self, item: MSIBItem) -> MSIBResponse:
        tok = WhitespaceTokenizer()
        segments = tuple(
            ContextSegment(
                turn_index=i, modality="text", token_span=tok.count(t.text), text=f"{t.role}: {t.text}"
            )
            for i, t in enumerate(item.turns)
        )
        pack = ContextPack(
            segments=segments,
            total_tokens=sum(s.token_span for s in segments),
            evicted_turns=(),
        )
        text = " ".join(self.backend.stream_text(GenerationRequest(context=pack)))
        wav = None
        if text.strip():
            samples = self.tts.synthesize_text(text)
            wav = pcm16_bytes(samples)
        return MSIBResponse(text=text, audio_wav=wav)


def run_msib(
    items: Sequence[MSIBItem],
    model: MSIBModel,
    judge: Backend,
    parallelism: int = 4,
    seed: int = 0,
) -> list[MSIBVerdictRecord]:
    for item in items:
        item.validate()
    order = list(range(len(items)))
    random.Random(seed).shuffle(order)

    def evaluate(idx: int) -> MSIBVerdictRecord:
        item = items[idx]
        try:
            response = model.respond(item)
        except Exception as exc:  # noqa: BLE001
            return MSIBVerdictRecord(
                item_id=item.item_id,
                dimension=item.dimension,
                verdict=None,
                judge_raw="",
                judge_model=judge.profile.model_name,
                error=f"model backend: {exc}",
            )
        prompt = render_judge_prompt(item.background_text)
        media = (
            (JudgeMedia(kind="audio", data=response.audio_wav, mime="audio/wav"),)
            if response.audio_wav
            else ()
        )
        try:
            raw = judge.judge(prompt, media=media)
        except BackendError as exc:
            if exc.unreachable:
                raise
            raw = exc.body or ""
            return MSIBVerdictRecord(
                item_id=item.item_id,
                dimension=item.dimension,
                verdict=None,
                judge_raw=raw,
                judge_model=judge.profile.model_name,
                error=f"judge backend: {exc}",
            )
        try:
            verdict = parse_msib_verdict(raw)
            error = None
        except VerdictParseError as exc:
            verdict = None
            error = f"verdict parse: {exc}"
        return MSIBVerdictRecord(
            item_id=item.item_id,
            dimension=item.dimension,
            verdict=verdict,
            judge_raw=raw,
            judge_model=judge.profile.model_name,
            error=error,
        )

    results: dict[int, MSIBVerdictRecord] = {}
    try:
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            for idx, record in zip(order, pool.map(evaluate, order)):
                results[idx] = record
    except BackendError as exc:
        partial = [results[i] for i in sorted(results)]
        raise BenchAborted(f"judge unreachable: {exc}", partial_report=partial) from exc
    return [results[i] for i in sorted(results)]


def round2(value: float) -> float:
    """Half-up rounding to two decimals, as in the reported tables."""
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def aggregate_msib(verdicts: Sequence[MSIBVerdictRecord]) -> dict:
    """Per-dimension content/speech means and their average, plus pooled overall.

    The average row is (content mean + speech mean) / 2 computed on the raw
    means, then rounded; the overall column pools every scored item within the
    same row family. Dimensions with no scored items are absent.
    """
    by_dim: dict[str, list[MSIBVerdict]] = {}
    pooled: list[MSIBVerdict] = []
    for rec in verdicts:
        if rec.verdict is None:
            continue
        by_dim.setdefault(rec.dimension, []).append(rec.verdict)
        pooled.append(rec.verdict)

    def row(vs: list[MSIBVerdict]) -> dict:
        content = sum(v.content_quality_score for v in vs) / len(vs)
        speech = sum(v.speech_quality_score for v in vs) / len(vs)
        return {
            "content": round2(content),
            "speech": round2(speech),
            "average": round2((content + speech) / 2.0),
            "n": len(vs),
        }

    dimensions = {dim: row(vs) for dim, vs in by_dim.items() if vs}
    result: dict = {"dimensions": dimensions}
    if pooled:
        result["overall"] = row(pooled)
    return result


def msib_aggregates(verdicts: Sequence[MSIBVerdictRecord]) -> dict:
    scored = [v for v in verdicts if v.verdict is not None]
    agg = aggregate_msib(verdicts)
    agg.update(
        {
            "n_items": len(verdicts),
            "n_scored": len(scored),
            "n_unscored": len(verdicts) - len(scored),
            "judge_prompt_version": MSIB_PROMPT_VERSION,
        }
    )
    return agg


def ingest_mos(
    ratings_path: str,
    item_dimensions: dict[str, str] | None = None,
) -> dict[str, dict]:
    """Per-dimension MOS means from a ratings CSV.

    Expects columns item_id, rater_id, score, and optionally dimension; when
    the column is absent, ``item_dimensions`` must map item ids to dimensions.
    Duplicate (item, rater) pairs and scores outside 1-5 are rejected.
    """
    seen: set[tuple[str, str]] = set()
    by_dim: dict[str, list[int]] = {}
    raters: dict[str, set[str]] = {}
    with open(ratings_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"item_id", "rater_id", "score"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValidationError(f"ratings file needs columns {sorted(required)}")
        for lineno, rec in enumerate(reader, start=2):
            key = (rec["item_id"], rec["rater_id"])
            if key in seen:
                raise ValidationError(f"line {lineno}: duplicate rating for {key}")
            seen.add(key)
            try:
                score_f = float(rec["score"])
            except ValueError:
                raise ValidationError(f"line {lineno}: non-numeric score {rec['score']!r}")
            if not score_f.is_integer() or not 1 <= score_f <= 5:
                raise ValidationError(f"line {lineno}: score must be an integer in 1-5")
            dim = rec.get("dimension") or (item_dimensions or {}).get(rec["item_id"])
            if not dim:
                raise ConfigError(
                    f"line {lineno}: no dimension column and no mapping for {rec['item_id']!r}"
                )
            if dim not in MSIB_DIMENSIONS:
                raise ValidationError(f"line {lineno}: unknown dimension {dim!r}")
            by_dim.setdefault(dim, []).append(int(score_f))
            raters.setdefault(dim, set()).add(rec["rater_id"])
    return {
        dim: {
            "mean": round2(sum(scores) / len(scores)),
            "n_ratings": len(scores),
            "n_raters": len(raters[dim]),
        }
        for dim, scores in sorted(by_dim.items())
    }
