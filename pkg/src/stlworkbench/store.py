"""On-disk session persistence.

A session document records the raw inputs and the transcript (NL text,
uploaded demonstrations, submitted answers) plus training artifacts.
Because the dialogue engine is deterministic, reloading replays those
events and reconstructs an identical live session.  Writes are atomic
(temp file + rename) and versioned, so a crash between requests loses at
most the in-flight request.
"""

from __future__ import annotations

import json
import os
import tempfile
import uuid
from pathlib import Path

DATA_DIR_ENV = "STLWB_DATA_DIR"


class StoreError(Exception):
    pass


def default_data_dir():
    return Path(os.environ.get(DATA_DIR_ENV, os.path.join(tempfile.gettempdir(), "stlwb-sessions")))


class SessionStore:
    def __init__(self, directory=None):
        self.directory = Path(directory) if directory else default_data_dir()
        self.directory.mkdir(parents=True, exist_ok=True)

    def new_id(self):
        return uuid.uuid4().hex[:12]

    def path(self, session_id):
        return self.directory / f"{session_id}.json"

    def exists(self, session_id):
        return self.path(session_id).exists()

    def list_ids(self):
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def save(self, session_id, document):
        document = dict(document)
        document["version"] = document.get("version", 0) + 1
        target = self.path(session_id)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(document, fh, indent=1)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return document["version"]

    def load(self, session_id):
        path = self.path(session_id)
        if not path.exists():
            raise StoreError(f"unknown session {session_id!r}")
        with open(path) as fh:
            return json.load(fh)

    def delete(self, session_id):
        path = self.path(session_id)
        if path.exists():
            path.unlink()
