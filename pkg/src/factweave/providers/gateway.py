"""The single choke point for external capabilities.

Every network-adjacent operation in the pipeline goes through this facade:
it enforces preconditions, bounds concurrency per provider, retries
transient failures with backoff, accounts cost and tokens, and records one
ProviderCallRecord per committed call.  Nothing outside this package
performs I/O.
"""

from __future__ import annotations

import dataclasses
import random
import threading
import time
from typing import Callable, Optional

from ..ingest import MediaStore
from ..models import Diagnostics, ImageRef, ProviderCallRecord, Query, content_hash
from .base import (
    Backend,
    ContextOverflow,
    CostTable,
    PageContent,
    ProviderError,
    ProviderKind,
    ProviderSettings,
    ProviderUnavailable,
    RetryPolicy,
    maybe_raise_payload_error,
)
from .cassette import request_digest
from ..credibility import normalize_host
from ..models import parse_timestamp

REVERSE_IMAGE_PAGE_SIZE = 10


def host_in_scope(url: str, scope: frozenset[str] | set[str]) -> bool:
    """True when the URL's host is a scope domain or one of its subdomains."""
    host = normalize_host(url)
    labels = host.split(".")
    return any(".".join(labels[i:]) in scope for i in range(len(labels)))


class ProviderGateway:
    """Typed operations over a set of backends, bound to one run's
    diagnostics.  Use ``for_run`` to bind a fresh run without rebuilding
    backends, semaphores, or settings."""

    def __init__(
        self,
        backends: dict[ProviderKind, Backend],
        media: Optional[MediaStore] = None,
        settings: Optional[dict[ProviderKind, ProviderSettings]] = None,
        retry: Optional[RetryPolicy] = None,
        diagnostics: Optional[Diagnostics] = None,
        memoize: bool = True,
        jitter_source: Optional[Callable[[], float]] = None,
        sleep: Callable[[float], None] = time.sleep,
        _semaphores: Optional[dict[ProviderKind, threading.BoundedSemaphore]] = None,
    ) -> None:
        self.backends = backends
        self.media = media if media is not None else MediaStore()
        self.settings = settings or {}
        self.retry = retry or RetryPolicy()
        self.diagnostics = diagnostics if diagnostics is not None else Diagnostics()
        self.memoize = memoize
        self._memo: dict[tuple[str, str], dict] = {}
        self._memo_lock = threading.Lock()
        self._jitter = jitter_source or random.random
        self._sleep = sleep
        if _semaphores is not None:
            self._semaphores = _semaphores
        else:
            self._semaphores = {
                kind: threading.BoundedSemaphore(self._settings_for(kind).max_in_flight)
                for kind in ProviderKind
            }

    def for_run(self, diagnostics: Diagnostics) -> "ProviderGateway":
        """A gateway recording into a fresh run's diagnostics.

        Backends, settings, and concurrency limits are shared; the memo
        cache is per run so call counts stay a pure function of the input.
        """
        return ProviderGateway(
            backends=self.backends,
            media=self.media,
            settings=self.settings,
            retry=self.retry,
            diagnostics=diagnostics,
            memoize=self.memoize,
            jitter_source=self._jitter,
            sleep=self._sleep,
            _semaphores=self._semaphores,
        )

    def _settings_for(self, kind: ProviderKind) -> ProviderSettings:
        return self.settings.get(kind, _DEFAULT_SETTINGS)

    def backend_id(self, kind: ProviderKind) -> str:
        backend = self.backends.get(kind)
        model = self._settings_for(kind).model
        if model:
            return model
        return getattr(backend, "backend_id", type(backend).__name__)

    def _call(self, kind: ProviderKind, request: dict, *, speculative: bool = False) -> dict:
        backend = self.backends.get(kind)
        if backend is None:
            raise ProviderUnavailable(f"no backend configured for {kind.value}", retryable=False)
        digest = request_digest(kind, request)
        memo_key = (kind.value, digest)
        if self.memoize:
            with self._memo_lock:
                if memo_key in self._memo:
                    self.diagnostics.cache_hits += 1
                    return self._memo[memo_key]

        policy = self.retry
        response: Optional[dict] = None
        last_exc: Optional[ProviderError] = None
        started = time.monotonic()
        for attempt in range(policy.attempts):
            semaphore = self._semaphores[kind]
            with semaphore:
                try:
                    response = backend.invoke(request)
                    last_exc = None
                    break
                except ProviderUnavailable as exc:
                    last_exc = exc
                    if not exc.retryable or attempt == policy.attempts - 1:
                        break
            self._sleep(policy.delay_for(attempt, self._jitter()))
        latency = time.monotonic() - started

        if last_exc is not None:
            raise last_exc
        assert response is not None
        maybe_raise_payload_error(response)

        usage = response.get("_usage", {})
        prompt_tokens = int(usage.get("prompt_tokens", 0))
        completion_tokens = int(usage.get("completion_tokens", 0))
        cost_table: CostTable = self._settings_for(kind).cost
        self.diagnostics.record_call(
            ProviderCallRecord(
                kind=kind.value,
                request_digest=digest,
                response_digest=content_hash(response),
                latency=latency,
                cost=cost_table.cost_of(prompt_tokens, completion_tokens),
                prompt_tokens=prompt_tokens,
                completion_tokens=completion_tokens,
                speculative=speculative,
            )
        )
        if self.memoize:
            with self._memo_lock:
                self._memo[memo_key] = response
        return response

    def commit_call(self, kind: ProviderKind, request: dict) -> None:
        """Reclassify a speculative call as committed work.

        Lookahead stages issue calls tagged speculative because they may
        fall past the stop point; when the sequential decision loop actually
        consumes one, its cost moves into the committed ledger so accounting
        matches a strictly sequential run.
        """
        digest = request_digest(kind, request)
        with self._memo_lock:
            for i, rec in enumerate(self.diagnostics.calls):
                if rec.speculative and rec.kind == kind.value and rec.request_digest == digest:
                    self.diagnostics.calls[i] = dataclasses.replace(rec, speculative=False)
                    return

    # -- chat ---------------------------------------------------------------

    def chat_request(self, prompt: str, context: str = "") -> dict:
        """The wire request ``chat`` would issue, for digest bookkeeping."""
        return {"prompt": prompt, "context": context}

    def chat(self, prompt: str, context: str = "", *, speculative: bool = False) -> str:
        if not prompt:
            raise ValueError("prompt must be nonempty")
        limit = self._settings_for(ProviderKind.CHAT_LLM).context_limit_chars
        if len(prompt) + len(context) > limit:
            raise ContextOverflow(
                f"prompt+context is {len(prompt) + len(context)} chars, limit {limit}"
            )
        response = self._call(
            ProviderKind.CHAT_LLM, self.chat_request(prompt, context), speculative=speculative
        )
        return response["text"]

    # -- embeddings ---------------------------------------------------------

    def embed_text(self, text: str) -> list[float]:
        if not text:
            raise ValueError("cannot embed empty text")
        response = self._call(ProviderKind.TEXT_EMBEDDER, {"text": text})
        return list(response["vector"])

    def embed_image(self, image: ImageRef) -> list[float]:
        self.media.get(image.sha256)  # fail fast on unknown media
        response = self._call(ProviderKind.IMAGE_EMBEDDER, {"image_sha256": image.sha256})
        return list(response["vector"])

    # -- vision -------------------------------------------------------------

    def caption(self, image: ImageRef, prompt: str = "") -> str:
        self.media.get(image.sha256)
        request: dict = {"image_sha256": image.sha256}
        if prompt:
            request["prompt"] = prompt
        response = self._call(ProviderKind.CAPTIONER, request)
        return response["text"]

    def recognize_celebrities(self, image: ImageRef) -> list[str]:
        self.media.get(image.sha256)
        response = self._call(ProviderKind.CELEBRITY_RECOGNIZER, {"image_sha256": image.sha256})
        return list(response["names"])

    def ocr(self, image: ImageRef) -> str:
        self.media.get(image.sha256)
        response = self._call(ProviderKind.OCR, {"image_sha256": image.sha256})
        return response["text"]

    # -- search -------------------------------------------------------------

    def search_text(self, query: Query, scope: frozenset[str] | set[str]) -> list[str]:
        if not scope:
            raise ValueError("search scope must be nonempty")
        request = {"query": query.text, "scope": sorted(scope)}
        response = self._call(ProviderKind.TEXT_SEARCH, request)
        return [url for url in response["urls"] if host_in_scope(url, scope)]

    def search_reverse_image(self, image: ImageRef, max_pages: int) -> list[str]:
        if max_pages < 1:
            raise ValueError("max_pages must be at least 1")
        self.media.get(image.sha256)
        request = {"image_sha256": image.sha256, "max_pages": max_pages}
        response = self._call(ProviderKind.REVERSE_IMAGE_SEARCH, request)
        # This engine cannot scope its sites; the caller filters domains.
        return list(response["urls"])[: max_pages * REVERSE_IMAGE_PAGE_SIZE]

    # -- page content -------------------------------------------------------

    def extract_content(self, url: str) -> PageContent:
        response = self._call(ProviderKind.CONTENT_EXTRACTOR, {"url": url})
        main_image = None
        image_b64 = response.get("main_image_b64")
        if image_b64:
            import base64

            data = base64.b64decode(image_b64)
            digest = self.media.put(data)
            main_image = ImageRef(uri=response.get("main_image_uri") or url, sha256=digest)
        published_raw = response.get("published_at")
        return PageContent(
            title=response.get("title", ""),
            main_text=response["main_text"],
            main_image=main_image,
            published_at=parse_timestamp(published_raw) if published_raw else None,
        )


_DEFAULT_SETTINGS = ProviderSettings()
