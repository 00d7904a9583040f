"""File-backed persistence for models and comparison sessions.

Layout under the store root: ``models/{id}.json`` holds model documents,
``sessions/{id}.json`` holds full session state including the iteration
history. Writes go through a temp file and an atomic rename, so a crash
never leaves a half-written document behind. The whole store is loaded
at construction; an unreadable file aborts startup and names the file.
"""

from __future__ import annotations

import json
import os
import re
import threading
from pathlib import Path

from .errors import DomainError, DuplicateModel, StoreCorrupt, UnknownModel, UnknownSession
from .model import ProcessModel, model_to_data, parse_model
from .session import Session, session_from_data, session_to_data

_SESSION_ID = re.compile(r"^s-(\d+)$")


class SessionStore:
    def __init__(self, root):
        self.root = Path(root)
        self.models_dir = self.root / "models"
        self.sessions_dir = self.root / "sessions"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.lock = threading.RLock()
        self._models: dict[str, ProcessModel] = {}
        self._sessions: dict[str, Session] = {}
        self._session_counter = 0
        self._load()

    def _load(self) -> None:
        for path in sorted(self.models_dir.glob("*.json")):
            try:
                model = parse_model(path.read_text(encoding="utf-8"))
            except (DomainError, OSError, UnicodeDecodeError) as exc:
                raise StoreCorrupt(
                    f"cannot load model file {path}: {exc}", details={"file": str(path)}
                ) from None
            self._models[model.id] = model
        for path in sorted(self.sessions_dir.glob("*.json")):
            try:
                session = session_from_data(json.loads(path.read_text(encoding="utf-8")))
            except (DomainError, OSError, UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
                raise StoreCorrupt(
                    f"cannot load session file {path}: {exc}", details={"file": str(path)}
                ) from None
            self._sessions[session.id] = session
            match = _SESSION_ID.match(session.id)
            if match:
                self._session_counter = max(self._session_counter, int(match.group(1)))

    @staticmethod
    def _write(path: Path, text: str) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)

    # --- models ---

    def add_model(self, model: ProcessModel) -> ProcessModel:
        with self.lock:
            if model.id in self._models:
                raise DuplicateModel(
                    f"a model with id {model.id!r} already exists", details={"model": model.id}
                )
            self._write(
                self.models_dir / f"{model.id}.json",
                json.dumps(model_to_data(model), indent=2, ensure_ascii=False) + "\n",
            )
            self._models[model.id] = model
            return model

    def model(self, model_id: str) -> ProcessModel:
        with self.lock:
            try:
                return self._models[model_id]
            except KeyError:
                raise UnknownModel(
                    f"no model with id {model_id!r}", details={"model": model_id}
                ) from None

    def model_ids(self) -> list[str]:
        with self.lock:
            return sorted(self._models)

    # --- sessions ---

    def next_session_id(self) -> str:
        with self.lock:
            self._session_counter += 1
            return f"s-{self._session_counter}"

    def add_session(self, session: Session) -> Session:
        with self.lock:
            self._sessions[session.id] = session
            self.save_session(session)
            return session

    def session(self, session_id: str) -> Session:
        with self.lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSession(
                    f"no session with id {session_id!r}", details={"session": session_id}
                ) from None

    def session_ids(self) -> list[str]:
        with self.lock:
            return sorted(self._sessions)

    def save_session(self, session: Session) -> None:
        with self.lock:
            self._write(
                self.sessions_dir / f"{session.id}.json",
                json.dumps(session_to_data(session), indent=2, ensure_ascii=False) + "\n",
            )
