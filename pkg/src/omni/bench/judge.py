"""Judge prompt rendering and verdict parsing.

The speech-interaction judge prompt is a versioned golden file used verbatim;
rendering is a single-pass placeholder substitution so braces inside the
substituted text survive untouched. Verdict extraction takes the first
complete JSON object in the raw judge output, since judges routinely wrap
their answer in prose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..errors import ConfigError, VerdictParseError, VerdictRangeError

MSIB_PROMPT_VERSION = "msib_judge_v1"
MMMB_PROMPT_VERSION = "mmmb_judge_v1"

MSIB_REQUIRED_FIELDS = (
    "transcript",
    "speech_quality_score",
    "content_quality_score",
    "speech_score_reasoning",
    "content_score_reasoning",
)


def _load_prompt(name: str) -> str:
    path = resources.files("omni.bench") / "prompts" / f"{name}.txt"
    return path.read_text(encoding="utf-8")


def load_msib_template() -> str:
    return _load_prompt(MSIB_PROMPT_VERSION)


def load_mmmb_template() -> str:
    return _load_prompt(MMMB_PROMPT_VERSION)


def _substitute_once(template: str, placeholder: str, value: str) -> str:
    if placeholder not in template:
        raise ConfigError(f"judge template is missing the {placeholder} placeholder")
    return template.replace(placeholder, value)


def render_judge_prompt(background_text: str, template: str | None = None) -> str:
    """Golden speech-judge template with the background text substituted in.

    Everything outside the substitution point is emitted byte-for-byte.
    """
    template = template if template is not None else load_msib_template()
    return _substitute_once(template, "{background_text}", background_text)


def render_mmmb_judge_prompt(
    reference_answer: str, model_response: str, template: str | None = None
) -> str:
    template = template if template is not None else load_mmmb_template()
    out = _substitute_once(template, "{reference_answer}", reference_answer)
    return _substitute_once(out, "{model_response}", model_response)


def extract_first_object(raw: str) -> dict:
    """First complete JSON object embedded anywhere in the text."""
    decoder = json.JSONDecoder()
    idx = raw.find("{")
    while idx != -1:
        try:
            obj, _ = decoder.raw_decode(raw, idx)
        except json.JSONDecodeError:
            idx = raw.find("{", idx + 1)
            continue
        if isinstance(obj, dict):
            return obj
        idx = raw.find("{", idx + 1)
    raise VerdictParseError("no JSON object found in judge output")


@dataclass(frozen=True)
class MSIBVerdict:
    transcript: str
    speech_quality_score: int
    content_quality_score: int
    speech_score_reasoning: str
    content_score_reasoning: str

    def to_dict(self) -> dict:
        return {
            "transcript": self.transcript,
            "speech_quality_score": self.speech_quality_score,
            "content_quality_score": self.content_quality_score,
            "speech_score_reasoning": self.speech_score_reasoning,
            "content_score_reasoning": self.content_score_reasoning,
        }


def _check_score(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise VerdictParseError(f"{name} must be an integer, got {value!r}")
    if not 1 <= value <= 5:
        raise VerdictRangeError(f"{name} must be in 1-5, got {value}")
    return value


def parse_msib_verdict(raw: str) -> MSIBVerdict:
    """Parse the five-field verdict object; out-of-range scores are errors, never clamped."""
    obj = extract_first_object(raw)
    missing = [f for f in MSIB_REQUIRED_FIELDS if f not in obj]
    if missing:
        raise VerdictParseError(f"verdict object is missing fields: {', '.join(missing)}")
    return MSIBVerdict(
        transcript=str(obj["transcript"]),
        speech_quality_score=_check_score("speech_quality_score", obj["speech_quality_score"]),
        content_quality_score=_check_score("content_quality_score", obj["content_quality_score"]),
        speech_score_reasoning=str(obj["speech_score_reasoning"]),
        content_score_reasoning=str(obj["content_score_reasoning"]),
    )


def parse_mmmb_verdict(raw: str) -> bool:
    """Correctness flag from the multi-turn memory judge output."""
    obj = extract_first_object(raw)
    if "correct" not in obj:
        raise VerdictParseError("verdict object has no 'correct' field")
    value = obj["correct"]
    if not isinstance(value, bool):
        raise VerdictParseError(f"'correct' must be a boolean, got {value!r}")
    return value
