"""Benchmark harnesses: multi-turn memory (MMMB) and speech interaction (MSIB)."""

from .items import (
    HistoryTurn,
    MMMBItem,
    MSIB_DIMENSIONS,
    MSIBItem,
    load_mmmb_items,
    load_msib_items,
    make_synthetic_mmmb,
    make_synthetic_msib,
    write_items,
)
from .judge import (
    MSIBVerdict,
    parse_mmmb_verdict,
    parse_msib_verdict,
    render_judge_prompt,
    render_mmmb_judge_prompt,
)
from .mmmb import (
    BackendModel,
    BenchAborted,
    MMMBVerdictRecord,
    ScriptedModel,
    degradation_curves,
    mmmb_aggregates,
    run_mmmb,
    score_by_memory_type,
)
from .msib import (
    BackendSpeechModel,
    MSIBResponse,
    MSIBVerdictRecord,
    ScriptedSpeechModel,
    aggregate_msib,
    ingest_mos,
    msib_aggregates,
    run_msib,
)
from .report import BenchReport

__all__ = [
    "BackendModel",
    "BackendSpeechModel",
    "BenchAborted",
    "BenchReport",
    "HistoryTurn",
    "MMMBItem",
    "MMMBVerdictRecord",
    "MSIB_DIMENSIONS",
    "MSIBItem",
    "MSIBResponse",
    "MSIBVerdict",
    "MSIBVerdictRecord",
    "ScriptedModel",
    "ScriptedSpeechModel",
    "aggregate_msib",
    "degradation_curves",
    "ingest_mos",
    "load_mmmb_items",
    "load_msib_items",
    "make_synthetic_mmmb",
    "make_synthetic_msib",
    "mmmb_aggregates",
    "msib_aggregates",
    "parse_mmmb_verdict",
    "parse_msib_verdict",
    "render_judge_prompt",
    "render_mmmb_judge_prompt",
    "run_mmmb",
    "run_msib",
    "score_by_memory_type",
    "write_items",
]
