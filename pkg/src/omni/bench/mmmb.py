"""Multi-turn memory benchmark: run, score by memory type, degradation analytics.

Each item's history turns are fed as context; only the final-question response
is judged against the reference answer. Model failures leave the item in the
report as unscored; an unreachable judge aborts the run with a partial report.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from ..backends import Backend, GenerationRequest
from ..errors import BackendError, OmniError, VerdictParseError
from ..session import ImageRef, SessionState, append_turn, assemble_context, make_turn
from .items import MMMBItem
from .judge import MMMB_PROMPT_VERSION, parse_mmmb_verdict, render_mmmb_judge_prompt

DEFAULT_IMAGE_DIM = 448  # synthetic media ids carry no dimensions; charge one tile


class BenchAborted(OmniError):
    """Raised when the judge becomes unreachable; carries the partial report."""

    def __init__(self, message: str, partial_report=None):
        super().__init__(message)
        self.partial_report = partial_report


@dataclass(frozen=True)
class MMMBVerdictRecord:
    item_id: str
    memory_type: str
    turn_distance: int
    num_memorized_images: int
    correct: bool | None  # None when the item went unscored
    model_response: str
    judge_raw: str
    judge_model: str
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "memory_type": self.memory_type,
            "turn_distance": self.turn_distance,
            "num_memorized_images": self.num_memorized_images,
            "correct": self.correct,
            "model_response": self.model_response,
            "judge_raw": self.judge_raw,
            "judge_model": self.judge_model,
            "error": self.error,
        }


class MMMBModel(Protocol):
    model_name: str

    def respond(self, item: MMMBItem) -> str: ...


class ScriptedModel:
    """Answers from a plain function of the item; used for oracle runs."""

    def __init__(self, fn: Callable[[MMMBItem], str], model_name: str = "scripted"):
        self._fn = fn
        self.model_name = model_name

    def respond(self, item: MMMBItem) -> str:
        return self._fn(item)

    @classmethod
    def perfect(cls) -> "ScriptedModel":
        return cls(lambda item: item.reference_answer, model_name="scripted-perfect")

    @classmethod
    def never_correct(cls) -> "ScriptedModel":
        return cls(lambda item: "", model_name="scripted-never-correct")


class BackendModel:
    """Feeds the item history through session assembly into a generation backend."""

    def __init__(self, backend: Backend, budget_tokens: int = 32_768):
        self.backend = backend
        self.budget_tokens = budget_tokens
        self.model_name = backend.profile.model_name

    def respond(self, item: MMMBItem) -> str:
        state = SessionState(id=item.group_id, budget_tokens=self.budget_tokens)
        for i, turn in enumerate(item.turns):
            media = tuple(
                ImageRef(media_id=img, width_px=DEFAULT_IMAGE_DIM, height_px=DEFAULT_IMAGE_DIM)
                for img in turn.images
            )
            state = append_turn(state, make_turn(i, turn.role, turn.text, media=media))
        state = append_turn(state, make_turn(len(item.turns), "user", item.final_question))
        pack = assemble_context(state)
        return " ".join(self.backend.stream_text(GenerationRequest(context=pack)))


def judge_item(item: MMMBItem, response: str, judge: Backend) -> tuple[bool | None, str, str | None]:
    """Judge one response. Per-request judge failures leave the item unscored;
    an unreachable judge propagates so the run can abort with a partial report."""
    prompt = render_mmmb_judge_prompt(item.reference_answer, response)
    try:
        raw = judge.judge(prompt)
    except BackendError as exc:
        if exc.unreachable:
            raise
        return None, exc.body or "", f"judge backend: {exc}"
    try:
        return parse_mmmb_verdict(raw), raw, None
    except VerdictParseError as exc:
        return None, raw, f"verdict parse: {exc}"


def run_mmmb(
    items: Sequence[MMMBItem],
    model: MMMBModel,
    judge: Backend,
    parallelism: int = 4,
    seed: int = 0,
) -> list[MMMBVerdictRecord]:
    """Evaluate every item; returns verdict records in item order."""
    for item in items:
        item.validate()
    order = list(range(len(items)))
    random.Random(seed).shuffle(order)

    def evaluate(idx: int) -> MMMBVerdictRecord:
        item = items[idx]
        try:
            response = model.respond(item)
        except Exception as exc:  # noqa: BLE001 - model faults leave the item unscored
            return MMMBVerdictRecord(
                item_id=item.group_id,
                memory_type=item.memory_type,
                turn_distance=item.turn_distance,
                num_memorized_images=item.num_memorized_images,
                correct=None,
                model_response="",
                judge_raw="",
                judge_model=judge.profile.model_name,
                error=f"model backend: {exc}",
            )
        correct, raw, error = judge_item(item, response, judge)
        return MMMBVerdictRecord(
            item_id=item.group_id,
            memory_type=item.memory_type,
            turn_distance=item.turn_distance,
            num_memorized_images=item.num_memorized_images,
            correct=correct,
            model_response=response,
            judge_raw=raw,
            judge_model=judge.profile.model_name,
            error=error,
        )

    results: dict[int, MMMBVerdictRecord] = {}
    try:
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            for idx, record in zip(order, pool.map(evaluate, order)):
                results[idx] = record
    except BackendError as exc:
        partial = [results[i] for i in sorted(results)]
        raise BenchAborted(f"judge unreachable: {exc}", partial_report=partial) from exc
    return [results[i] for i in sorted(results)]


def score_by_memory_type(verdicts: Sequence[MMMBVerdictRecord]) -> dict[str, float]:
    """Accuracy (0-100) per memory type, plus a pooled Average over all items.

    Unscored items are excluded from both numerator and denominator; empty
    categories are absent from the result rather than reported as zero.
    """
    by_type: dict[str, list[bool]] = {}
    pooled: list[bool] = []
    for v in verdicts:
        if v.correct is None:
            continue
        by_type.setdefault(v.memory_type, []).append(v.correct)
        pooled.append(v.correct)
    scores = {
        mem: 100.0 * sum(flags) / len(flags) for mem, flags in sorted(by_type.items()) if flags
    }
    if pooled:
        scores["Average"] = 100.0 * sum(pooled) / len(pooled)
    return scores


def degradation_curves(
    items: Sequence[MMMBItem], verdicts: Sequence[MMMBVerdictRecord]
) -> dict[str, dict[int, float]]:
    """Accuracy binned by turn distance and by number of memorized images.

    Turn distance is final-question index minus the largest referent index.
    Only populated bins appear.
    """
    by_id = {item.group_id: item for item in items}
    dist_bins: dict[int, list[bool]] = {}
    img_bins: dict[int, list[bool]] = {}
    for v in verdicts:
        if v.correct is None:
            continue
        item = by_id[v.item_id]
        dist_bins.setdefault(item.turn_distance, []).append(v.correct)
        img_bins.setdefault(item.num_memorized_images, []).append(v.correct)
    return {
        "acc_by_turn_distance": {
            d: 100.0 * sum(flags) / len(flags) for d, flags in sorted(dist_bins.items())
        },
        "acc_by_num_images": {
            n: 100.0 * sum(flags) / len(flags) for n, flags in sorted(img_bins.items())
        },
    }


def mmmb_aggregates(
    items: Sequence[MMMBItem], verdicts: Sequence[MMMBVerdictRecord]
) -> dict:
    scored = [v for v in verdicts if v.correct is not None]
    curves = degradation_curves(items, verdicts)
    return {
        "scores": score_by_memory_type(verdicts),
        # Bin keys as strings so the persisted JSON form is the canonical one.
        "degradation": {
            name: {str(k): v for k, v in bins.items()} for name, bins in curves.items()
        },
        "n_items": len(verdicts),
        "n_scored": len(scored),
        "n_unscored": len(verdicts) - len(scored),
        "judge_prompt_version": MMMB_PROMPT_VERSION,
    }
