"""Record/replay for provider calls.

A cassette is a JSON-lines file of {kind, request_digest, request, response}.
Recording wraps a live backend and captures every response (including
deterministic failures); replay serves responses by request digest without
touching the network, which is what makes full pipeline runs reproducible.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional

from ..models import canonical_json, content_hash
from .base import (
    Backend,
    ProviderError,
    ProviderKind,
    ProviderUnavailable,
    error_to_payload,
    maybe_raise_payload_error,
)


def request_digest(kind: ProviderKind, request: dict) -> str:
    return content_hash({"kind": kind.value, "request": request})


class Cassette:
    """Append-friendly store of recorded provider exchanges."""

    def __init__(self, path: Optional[str | Path] = None) -> None:
        self.path = Path(path) if path else None
        self._entries: dict[tuple[str, str], dict] = {}
        if self.path and self.path.exists():
            self._load()

    def _load(self) -> None:
        assert self.path is not None
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                self._entries[(entry["kind"], entry["request_digest"])] = entry

    def __len__(self) -> int:
        return len(self._entries)

    def put(self, kind: ProviderKind, request: dict, response: dict) -> None:
        digest = request_digest(kind, request)
        entry = {
            "kind": kind.value,
            "request_digest": digest,
            "request": request,
            "response": response,
        }
        key = (kind.value, digest)
        is_new = key not in self._entries
        self._entries[key] = entry
        if self.path and is_new:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(canonical_json(entry) + "\n")

    def get(self, kind: ProviderKind, request: dict) -> Optional[dict]:
        entry = self._entries.get((kind.value, request_digest(kind, request)))
        return entry["response"] if entry else None

    def merge(self, other: "Cassette") -> None:
        """Fold another cassette's exchanges into this one; colliding digests
        take the other side's response."""
        for entry in other._entries.values():
            self.put(ProviderKind(entry["kind"]), entry["request"], entry["response"])

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as fh:
            for key in sorted(self._entries):
                fh.write(canonical_json(self._entries[key]) + "\n")
        self.path = path

    def cassette_id(self) -> str:
        """Content hash over all recorded exchanges."""
        digest = hashlib.sha256()
        for key in sorted(self._entries):
            digest.update(canonical_json(self._entries[key]).encode("utf-8"))
        return digest.hexdigest()


class ReplayBackend:
    """Serves recorded responses; a cassette miss is a non-retryable failure."""

    def __init__(self, kind: ProviderKind, cassette: Cassette) -> None:
        self.kind = kind
        self.cassette = cassette

    def invoke(self, request: dict) -> dict:
        response = self.cassette.get(self.kind, request)
        if response is None:
            raise ProviderUnavailable(
                f"no cassette entry for {self.kind.value} request", retryable=False
            )
        maybe_raise_payload_error(response)
        return response


class RecordingBackend:
    """Pass-through wrapper that captures every exchange into a cassette."""

    def __init__(self, kind: ProviderKind, inner: Backend, cassette: Cassette) -> None:
        self.kind = kind
        self.inner = inner
        self.cassette = cassette

    def invoke(self, request: dict) -> dict:
        try:
            response = self.inner.invoke(request)
        except ProviderUnavailable:
            # Transient transport failures are not part of the recorded run.
            raise
        except ProviderError as exc:
            self.cassette.put(self.kind, request, error_to_payload(exc))
            raise
        self.cassette.put(self.kind, request, response)
        return response


def replay_backends(cassette: Cassette) -> dict[ProviderKind, Backend]:
    return {kind: ReplayBackend(kind, cassette) for kind in ProviderKind}


def recording_backends(
    inner: dict[ProviderKind, Backend], cassette: Cassette
) -> dict[ProviderKind, Backend]:
    return {kind: RecordingBackend(kind, backend, cassette) for kind, backend in inner.items()}
