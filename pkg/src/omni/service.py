"""HTTP service: sessions, streaming turn responses over server-sent events,
and asynchronous benchmark runs.

Each response stream mirrors the interleave scheduler on the wire: one frame
per text group, one base64 PCM frame per speech group, an error frame on
backend failure, and a terminal done frame. Session mutation is serialized
per session id; a concurrent post to a busy session is rejected with 409.
"""

from __future__ import annotations

import base64
import io
import json
import logging
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import yaml
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import JSONResponse, StreamingResponse
from PIL import Image
from pydantic import BaseModel

from . import audio as audiolib
from .backends import Backend, BackendProfile, GenerationRequest, make_backend
from .bench import (
    BackendModel,
    BackendSpeechModel,
    BenchAborted,
    BenchReport,
    load_mmmb_items,
    load_msib_items,
    mmmb_aggregates,
    msib_aggregates,
    run_mmmb,
    run_msib,
)
from .errors import CapacityError, OmniError, ValidationError
from .interleave import (
    ConditioningHandle,
    FrameKind,
    StreamError,
    ToyVocoder,
    apply_style,
    schedule,
    synthesize_chunk,
)
from .session import (
    AudioRef,
    ImageRef,
    SessionState,
    append_turn,
    assemble_context,
    make_turn,
)
from .store import DataStore

DEFAULT_BUDGET = 32_768

logger = logging.getLogger(__name__)


class WireFrame(BaseModel):
    """One server-sent event payload; exactly one payload field per kind."""

    seq: int
    kind: str  # "text" | "audio" | "error" | "done"
    text: str | None = None
    audio_b64: str | None = None
    final: bool = False


class CreateSessionBody(BaseModel):
    budget_tokens: int | None = None


class BenchRunBody(BaseModel):
    items_file: str
    model: dict | None = None
    judge: dict | None = None
    parallelism: int = 4
    seed: int = 0


@dataclass
class ServiceConfig:
    data_dir: str = "./omni-data"
    backend: BackendProfile = field(default_factory=lambda: BackendProfile(kind="toy"))
    judge: BackendProfile = field(default_factory=lambda: BackendProfile(kind="toy"))
    bench_workers: int = 4


def load_config(path: str | Path) -> ServiceConfig:
    """Service config from a YAML file; absent backend/judge sections fall back
    to the OMNI_BACKEND_URL / OMNI_JUDGE_URL environment (toy when unset)."""
    doc = yaml.safe_load(Path(path).read_text()) or {}
    backend = (
        BackendProfile.from_dict(doc["backend"])
        if "backend" in doc
        else BackendProfile.from_env("backend")
    )
    judge = (
        BackendProfile.from_dict(doc["judge"])
        if "judge" in doc
        else BackendProfile.from_env("judge")
    )
    return ServiceConfig(
        data_dir=doc.get("data_dir", "./omni-data"),
        backend=backend,
        judge=judge,
        bench_workers=int(doc.get("bench_workers", 4)),
    )


def _sse(frame: WireFrame) -> str:
    return f"event: frame\ndata: {frame.model_dump_json(exclude_none=True)}\n\n"


class _CountingModel:
    """Wraps a bench model to expose run progress."""

    def __init__(self, inner, progress: dict):
        self.inner = inner
        self.model_name = inner.model_name
        self.progress = progress
        self._lock = threading.Lock()

    def respond(self, item):
        out = self.inner.respond(item)
        with self._lock:
            self.progress["completed"] += 1
        return out


def create_app(
    config: ServiceConfig | None = None,
    backend: Backend | None = None,
    judge: Backend | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    store = DataStore(config.data_dir)
    backend = backend or make_backend(config.backend)
    judge = judge or make_backend(config.judge)
    vocoder = ToyVocoder()
    run_progress: dict[str, dict] = {}
    run_pool = ThreadPoolExecutor(max_workers=max(1, config.bench_workers))

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        run_pool.shutdown(wait=False)

    app = FastAPI(title="omni interaction service", lifespan=lifespan)
    app.state.store = store
    app.state.config = config

    # -- sessions -----------------------------------------------------------------

    @app.post("/v1/sessions")
    def create_session(body: CreateSessionBody | None = None):
        budget = body.budget_tokens if body and body.budget_tokens is not None else DEFAULT_BUDGET
        if budget <= 0:
            raise HTTPException(400, detail="budget_tokens must be positive")
        session_id = uuid.uuid4().hex[:12]
        state = SessionState(id=session_id, budget_tokens=budget)
        store.save_session(state, packs=[])
        return {"id": session_id, "budget_tokens": budget}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            state, packs = store.load_session(session_id)
        except KeyError:
            raise HTTPException(404, detail=f"unknown session {session_id}")
        return {
            "id": state.id,
            "budget_tokens": state.budget_tokens,
            "turns": [
                {
                    "index": t.index,
                    "role": t.role,
                    "text": t.text,
                    "media": [
                        {"kind": m.kind, "media_id": m.media_id} for m in t.media
                    ],
                    "category": t.category.value if t.category else None,
                    "referent_turns": list(t.referent_turns),
                    "token_cost": t.token_cost,
                }
                for t in state.turns
            ],
            "total_tokens": sum(t.token_cost for t in state.turns),
            "packs": packs,
        }

    @app.post("/v1/sessions/{session_id}/turns")
    def post_turn(
        session_id: str,
        text: str | None = Form(None),
        style: str | None = Form(None),
        images: list[UploadFile] = File(None),
        audio: UploadFile | None = File(None),
    ):
        if not store.session_exists(session_id):
            raise HTTPException(404, detail=f"unknown session {session_id}")
        if not text and not images and not audio:
            raise HTTPException(400, detail="turn needs at least one input part")

        lock = store.session_lock(session_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(409, detail="another turn is in flight for this session")
        try:
            state, packs = store.load_session(session_id)
            media: list = []
            for upload in images or []:
                raw = upload.file.read()
                try:
                    with Image.open(io.BytesIO(raw)) as img:
                        width, height = img.size
                except Exception:
                    raise HTTPException(400, detail=f"unreadable image {upload.filename}")
                blob_id = store.put_blob(raw)
                media.append(ImageRef(media_id=blob_id, width_px=width, height_px=height))
            if audio is not None:
                raw = audio.file.read()
                try:
                    wave_in = audiolib.read_wav(raw)
                except OmniError as exc:
                    raise HTTPException(400, detail=f"unreadable audio: {exc}")
                wave16 = audiolib.resample(wave_in)
                blob_id = store.put_blob(raw)
                media.append(AudioRef(media_id=blob_id, duration_s=wave16.duration_s))

            user_turn = make_turn(
                len(state.turns), "user", text or "", media=tuple(media)
            )
            try:
                state = append_turn(state, user_turn)
            except CapacityError as exc:
                raise HTTPException(413, detail=str(exc))
            except ValidationError as exc:
                raise HTTPException(400, detail=str(exc))
            pack = assemble_context(state)
            packs = packs + [
                {"total_tokens": pack.total_tokens, "evicted_turns": list(pack.evicted_turns)}
            ]
            store.save_session(state, packs)
        except BaseException:
            lock.release()
            raise

        cond = ConditioningHandle(ref=f"{session_id}:{len(state.turns) - 1}")
        if style:
            cond = apply_style(cond, style)

        def frame_stream() -> Iterator[str]:
            seq = 0
            text_parts: list[str] = []
            failed = False
            try:
                text_tokens = backend.stream_text(GenerationRequest(context=pack, style=style))
                for item in schedule(text_tokens, backend.stream_speech, conditioning=cond):
                    if isinstance(item, StreamError):
                        yield _sse(WireFrame(seq=seq, kind="error", text=item.message))
                        seq += 1
                        failed = True
                        break
                    if item.kind == FrameKind.TEXT:
                        text_parts.append(" ".join(str(t) for t in item.tokens))
                        yield _sse(
                            WireFrame(
                                seq=seq,
                                kind="text",
                                text=" ".join(str(t) for t in item.tokens),
                                final=item.final,
                            )
                        )
                    else:
                        pcm = synthesize_chunk(item.tokens, vocoder, item.conditioning)
                        yield _sse(
                            WireFrame(
                                seq=seq,
                                kind="audio",
                                audio_b64=base64.b64encode(audiolib.pcm16_bytes(pcm)).decode(),
                                final=item.final,
                            )
                        )
                    seq += 1
                if not failed:
                    assistant = make_turn(
                        len(state.turns), "assistant", " ".join(text_parts)
                    )
                    new_state = append_turn(state, assistant)
                    store.save_session(new_state, packs)
                yield _sse(WireFrame(seq=seq, kind="done", final=True))
            except Exception as exc:  # noqa: BLE001 - surface as a terminal error frame
                yield _sse(WireFrame(seq=seq, kind="error", text=str(exc)))
                yield _sse(WireFrame(seq=seq + 1, kind="done", final=True))
            finally:
                lock.release()

        return StreamingResponse(frame_stream(), media_type="text/event-stream")

    # -- benchmark runs -------------------------------------------------------------

    def _execute_run(run_id: str, kind: str, body: BenchRunBody, items) -> None:
        model_profile = (
            BackendProfile.from_dict(body.model) if body.model else config.backend
        )
        judge_profile = BackendProfile.from_dict(body.judge) if body.judge else config.judge
        judge_backend = make_backend(judge_profile)
        run_config = {
            "items_file": body.items_file,
            "model_name": model_profile.model_name,
            "model": model_profile.to_dict(),
            "judge": judge_profile.to_dict(),
            "parallelism": body.parallelism,
            "seed": body.seed,
        }
        try:
            if kind == "mmmb":
                model = _CountingModel(
                    BackendModel(make_backend(model_profile)), run_progress[run_id]
                )
                verdicts = run_mmmb(
                    items, model, judge_backend, parallelism=body.parallelism, seed=body.seed
                )
                aggregates = mmmb_aggregates(items, verdicts)
            else:
                model = _CountingModel(
                    BackendSpeechModel(make_backend(model_profile)), run_progress[run_id]
                )
                verdicts = run_msib(
                    items, model, judge_backend, parallelism=body.parallelism, seed=body.seed
                )
                aggregates = msib_aggregates(verdicts)
            report = BenchReport(
                run_id=run_id,
                kind=kind,
                config=run_config,
                verdicts=[v.to_dict() for v in verdicts],
                aggregates=aggregates,
            )
            report.save(store.run_dir(run_id))
            store.write_run_meta(run_id, {"kind": kind, "status": "complete"})
        except BenchAborted as exc:
            partial = exc.partial_report or []
            report = BenchReport(
                run_id=run_id,
                kind=kind,
                config=run_config,
                verdicts=[v.to_dict() for v in partial],
                aggregates={},
                status="partial",
            )
            report.save(store.run_dir(run_id))
            store.write_run_meta(
                run_id, {"kind": kind, "status": "partial", "error": str(exc)}
            )
        except Exception as exc:  # noqa: BLE001 - recorded, surfaced via GET
            logger.exception("bench run %s failed", run_id)
            store.write_run_meta(run_id, {"kind": kind, "status": "failed", "error": str(exc)})

    @app.post("/v1/bench/{kind}/runs")
    def start_bench_run(kind: str, body: BenchRunBody):
        if kind not in ("mmmb", "msib"):
            raise HTTPException(400, detail=f"unknown benchmark kind {kind!r}")
        if not Path(body.items_file).exists():
            raise HTTPException(400, detail=f"items file not found: {body.items_file}")
        try:
            items = (
                load_mmmb_items(body.items_file)
                if kind == "mmmb"
                else load_msib_items(body.items_file)
            )
        except (ValidationError, json.JSONDecodeError) as exc:
            raise HTTPException(400, detail=f"invalid dataset: {exc}")
        run_id = uuid.uuid4().hex[:12]
        run_progress[run_id] = {"completed": 0, "total": len(items)}
        store.write_run_meta(run_id, {"kind": kind, "status": "running"})
        run_pool.submit(_execute_run, run_id, kind, body, items)
        return {"run_id": run_id, "total_items": len(items)}

    @app.get("/v1/bench/runs/{run_id}")
    def get_bench_run(run_id: str):
        try:
            meta = store.read_run_meta(run_id)
        except KeyError:
            raise HTTPException(404, detail=f"unknown run {run_id}")
        out = {"run_id": run_id, **meta}
        if meta["status"] == "running":
            out["progress"] = run_progress.get(run_id, {})
        if meta["status"] in ("complete", "partial"):
            out["report"] = BenchReport.load(store.run_dir(run_id)).to_dict()
        return out

    @app.exception_handler(OmniError)
    def omni_error_handler(_, exc: OmniError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    return app
