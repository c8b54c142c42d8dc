"""File-backed persistence: sessions as versioned JSON records, media blobs by
content hash, and benchmark run directories. Everything survives a restart."""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

from .errors import ValidationError
from .session import (
    QuestionCategory,
    SessionState,
    Turn,
    media_ref_from_dict,
    media_ref_to_dict,
)

SESSION_SCHEMA_VERSION = 1


class DataStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.blobs_dir = self.root / "blobs"
        self.reports_dir = self.root / "reports"
        for d in (self.sessions_dir, self.blobs_dir, self.reports_dir):
            d.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- per-session serialization ------------------------------------------------

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _session_path(self, session_id: str) -> Path:
        if not session_id or "/" in session_id or session_id.startswith("."):
            raise ValidationError(f"bad session id {session_id!r}")
        return self.sessions_dir / f"{session_id}.json"

    def session_exists(self, session_id: str) -> bool:
        return self._session_path(session_id).exists()

    def save_session(self, state: SessionState, packs: list[dict] | None = None) -> None:
        doc = {
            "schema_version": SESSION_SCHEMA_VERSION,
            "id": state.id,
            "budget_tokens": state.budget_tokens,
            "turns": [
                {
                    "index": t.index,
                    "role": t.role,
                    "text": t.text,
                    "media": [media_ref_to_dict(m) for m in t.media],
                    "category": t.category.value if t.category else None,
                    "referent_turns": list(t.referent_turns),
                    "token_cost": t.token_cost,
                }
                for t in state.turns
            ],
            "packs": packs or [],
        }
        path = self._session_path(state.id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, ensure_ascii=False))
        tmp.replace(path)

    def load_session(self, session_id: str) -> tuple[SessionState, list[dict]]:
        path = self._session_path(session_id)
        if not path.exists():
            raise KeyError(session_id)
        doc = json.loads(path.read_text())
        turns = tuple(
            Turn(
                index=t["index"],
                role=t["role"],
                text=t["text"],
                media=tuple(media_ref_from_dict(m) for m in t["media"]),
                category=QuestionCategory(t["category"]) if t.get("category") else None,
                referent_turns=tuple(t.get("referent_turns", ())),
                token_cost=t["token_cost"],
            )
            for t in doc["turns"]
        )
        state = SessionState(id=doc["id"], turns=turns, budget_tokens=doc["budget_tokens"])
        return state, doc.get("packs", [])

    # -- content-addressed blobs ---------------------------------------------------

    def put_blob(self, data: bytes, suffix: str = "") -> str:
        blob_id = hashlib.sha256(data).hexdigest()
        path = self.blobs_dir / f"{blob_id}{suffix}"
        if not path.exists():
            path.write_bytes(data)
        return blob_id

    def blob_path(self, blob_id: str, suffix: str = "") -> Path:
        return self.blobs_dir / f"{blob_id}{suffix}"

    # -- benchmark runs --------------------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.reports_dir / run_id

    def write_run_meta(self, run_id: str, meta: dict) -> None:
        d = self.run_dir(run_id)
        d.mkdir(parents=True, exist_ok=True)
        (d / "meta.json").write_text(json.dumps(meta, sort_keys=True))

    def read_run_meta(self, run_id: str) -> dict:
        path = self.run_dir(run_id) / "meta.json"
        if not path.exists():
            raise KeyError(run_id)
        return json.loads(path.read_text())

    def list_runs(self) -> list[str]:
        return sorted(p.name for p in self.reports_dir.iterdir() if p.is_dir())
