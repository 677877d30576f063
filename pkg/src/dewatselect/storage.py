"""File-backed persistence: one JSON document per study or session,
written atomically (temp file + rename) so an acknowledged mutation is
never lost to a crash mid-write.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_json(path: Path, doc) -> None:
    atomic_write_text(path, json.dumps(doc, sort_keys=True) + "\n")


class Store:
    """Study and session documents under a data directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.studies_dir = self.root / "studies"
        self.sessions_dir = self.root / "sessions"
        self.studies_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)

    def _load(self, path: Path) -> dict | None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return None

    def save_study(self, doc: dict) -> None:
        atomic_write_json(self.studies_dir / f"{doc['id']}.json", doc)

    def load_study(self, study_id: str) -> dict | None:
        return self._load(self.studies_dir / f"{study_id}.json")

    def save_session(self, doc: dict) -> None:
        atomic_write_json(self.sessions_dir / f"{doc['id']}.json", doc)

    def load_session(self, session_id: str) -> dict | None:
        return self._load(self.sessions_dir / f"{session_id}.json")
