"""Deterministic in-process backends.

These power the test suite and the offline demo corpus: every backend is a
pure table lookup, so a pipeline run over them is a pure function of its
input.  They are also what the recording layer wraps to produce fixture
cassettes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .base import (
    ExtractionEmpty,
    FetchFailed,
    ProviderKind,
    ProviderUnavailable,
)


@dataclass
class ScriptedChat:
    """Chat backend answering from a script.

    Matching sees the prompt plus its context block, newline-joined, so a
    script can key on post or article text even though the instruction part
    of a request is a fixed template.  ``exact`` maps that full text to its
    reply.  ``matchers`` is an ordered list of ((marker, ...), reply): the
    first entry whose markers are all present wins, letting a script pin
    both the request type and the subject.  ``rules`` is the single-marker
    shorthand, checked after.  Unknown requests raise, so a test cannot
    silently drift past its script.
    """

    exact: dict[str, str] = field(default_factory=dict)
    matchers: list[tuple[tuple[str, ...], str]] = field(default_factory=list)
    rules: list[tuple[str, str]] = field(default_factory=list)
    default: Optional[str] = None
    usage: Optional[dict] = None

    kind = ProviderKind.CHAT_LLM

    def reply_for(self, text: str) -> str:
        if text in self.exact:
            return self.exact[text]
        for markers, reply in self.matchers:
            if all(marker in text for marker in markers):
                return reply
        for marker, reply in self.rules:
            if marker in text:
                return reply
        if self.default is not None:
            return self.default
        raise ProviderUnavailable(
            f"no scripted reply for request starting {text[:80]!r}", retryable=False
        )

    def invoke(self, request: dict) -> dict:
        haystack = request["prompt"]
        if request.get("context"):
            haystack = haystack + "\n" + request["context"]
        text = self.reply_for(haystack)
        out = {"text": text}
        if self.usage is not None:
            out["_usage"] = dict(self.usage)
        return out


@dataclass
class FlakyChat:
    """Fails with a retryable outage a fixed number of times, then delegates.

    Exercises the retry loop without real timing.
    """

    inner: ScriptedChat
    failures: int = 2
    seen: int = 0

    kind = ProviderKind.CHAT_LLM

    def invoke(self, request: dict) -> dict:
        if self.seen < self.failures:
            self.seen += 1
            raise ProviderUnavailable("synthetic outage", retryable=True)
        return self.inner.invoke(request)


@dataclass
class DictEmbedder:
    """Text embedder returning one-dimensional vectors from a table.

    With vectors [a] and [b] the dot product is exactly a*b, which makes
    relevance thresholds easy to pin in tests.
    """

    table: dict[str, float]
    default: Optional[float] = None

    kind = ProviderKind.TEXT_EMBEDDER

    def invoke(self, request: dict) -> dict:
        text = request["text"]
        if text in self.table:
            return {"vector": [self.table[text]]}
        if self.default is not None:
            return {"vector": [self.default]}
        raise ProviderUnavailable(f"no embedding scripted for {text[:60]!r}", retryable=False)


@dataclass
class BasisEmbedder:
    """Maps each distinct text to its own standard basis vector.

    dot(v, v) == 1 and dot(v, w) == 0 for distinct texts, with dimensions
    assigned on first sight in call order.
    """

    dimensions: int = 64
    _index: dict[str, int] = field(default_factory=dict)

    kind = ProviderKind.TEXT_EMBEDDER

    def invoke(self, request: dict) -> dict:
        text = request["text"]
        if text not in self._index:
            if len(self._index) >= self.dimensions:
                raise ProviderUnavailable("basis space exhausted", retryable=False)
            self._index[text] = len(self._index)
        vector = [0.0] * self.dimensions
        vector[self._index[text]] = 1.0
        return {"vector": vector}


@dataclass
class TableImageEmbedder:
    """Image embedder keyed by content digest."""

    table: dict[str, list[float]]
    default: Optional[list[float]] = None

    kind = ProviderKind.IMAGE_EMBEDDER

    def invoke(self, request: dict) -> dict:
        digest = request["image_sha256"]
        if digest in self.table:
            return {"vector": list(self.table[digest])}
        if self.default is not None:
            return {"vector": list(self.default)}
        raise ProviderUnavailable(f"no image embedding for {digest[:12]}", retryable=False)


@dataclass
class TableCaptioner:
    table: dict[str, str]
    default: str = ""

    kind = ProviderKind.CAPTIONER

    def invoke(self, request: dict) -> dict:
        return {"text": self.table.get(request["image_sha256"], self.default)}


@dataclass
class TableCelebrityRecognizer:
    table: dict[str, list[str]]

    kind = ProviderKind.CELEBRITY_RECOGNIZER

    def invoke(self, request: dict) -> dict:
        return {"names": list(self.table.get(request["image_sha256"], []))}


@dataclass
class TableOcr:
    table: dict[str, str]
    default: str = ""

    kind = ProviderKind.OCR

    def invoke(self, request: dict) -> dict:
        return {"text": self.table.get(request["image_sha256"], self.default)}


@dataclass
class ScriptedSearch:
    """Text search keyed by query string; ignores scope (the gateway
    filters).  Missing queries return no links, like a real engine."""

    table: dict[str, list[str]]

    kind = ProviderKind.TEXT_SEARCH

    def invoke(self, request: dict) -> dict:
        return {"urls": list(self.table.get(request["query"], []))}


@dataclass
class ScriptedReverseImage:
    """Reverse-image search keyed by content digest.  Returns the full
    scripted list; the gateway applies the page cap."""

    table: dict[str, list[str]]

    kind = ProviderKind.REVERSE_IMAGE_SEARCH

    def invoke(self, request: dict) -> dict:
        return {"urls": list(self.table.get(request["image_sha256"], []))}


@dataclass
class ScriptedExtractor:
    """Content extractor keyed by URL.

    Values are response payloads ({"title", "main_text", ...}).  URLs in
    ``failing`` raise FetchFailed; URLs in ``empty`` raise ExtractionEmpty.
    Both are deterministic outcomes a cassette can replay.
    """

    table: dict[str, dict]
    failing: set[str] = field(default_factory=set)
    empty: set[str] = field(default_factory=set)

    kind = ProviderKind.CONTENT_EXTRACTOR

    def invoke(self, request: dict) -> dict:
        url = request["url"]
        if url in self.failing:
            raise FetchFailed(f"could not fetch {url}")
        if url in self.empty:
            raise ExtractionEmpty(f"no main content at {url}")
        if url not in self.table:
            raise FetchFailed(f"could not fetch {url}")
        payload = dict(self.table[url])
        payload.setdefault("title", "")
        return payload


@dataclass
class CountingBackend:
    """Wraps a backend and counts invocations.  For call-count assertions."""

    inner: object
    calls: int = 0
    on_invoke: Optional[Callable[[dict], None]] = None

    @property
    def kind(self) -> ProviderKind:
        return self.inner.kind  # type: ignore[attr-defined]

    def invoke(self, request: dict) -> dict:
        self.calls += 1
        if self.on_invoke is not None:
            self.on_invoke(request)
        return self.inner.invoke(request)  # type: ignore[attr-defined]
