"""Provider vocabulary: capability kinds, error taxonomy, and the uniform
backend contract every transport (live, mock, record/replay) implements.

A backend takes a JSON-safe request dict and returns a JSON-safe response
dict; that uniformity is what makes every call recordable and replayable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Protocol, runtime_checkable

from ..models import ImageRef


class ProviderKind(enum.Enum):
    CHAT_LLM = "chat_llm"
    TEXT_EMBEDDER = "text_embedder"
    IMAGE_EMBEDDER = "image_embedder"
    CAPTIONER = "captioner"
    CELEBRITY_RECOGNIZER = "celebrity_recognizer"
    OCR = "ocr"
    TEXT_SEARCH = "text_search"
    REVERSE_IMAGE_SEARCH = "reverse_image_search"
    CONTENT_EXTRACTOR = "content_extractor"


class ProviderError(RuntimeError):
    pass


class ProviderUnavailable(ProviderError):
    """Transport or provider failure. ``retryable`` gates the retry loop."""

    def __init__(self, message: str, retryable: bool = True) -> None:
        super().__init__(message)
        self.retryable = retryable


class ContextOverflow(ProviderError):
    """Input exceeds the provider's context limit; raised before any call."""


class QuotaExceeded(ProviderError):
    pass


class FetchFailed(ProviderError):
    """Page fetch failed (HTTP error, unreachable host)."""


class ExtractionEmpty(ProviderError):
    """The page yielded no main text; the page is dropped, not fatal."""


# Deterministic provider outcomes that replay must reproduce.
REPLAYABLE_ERRORS: dict[str, type[ProviderError]] = {
    "FetchFailed": FetchFailed,
    "ExtractionEmpty": ExtractionEmpty,
    "QuotaExceeded": QuotaExceeded,
}


def error_to_payload(exc: ProviderError) -> dict:
    return {"_error": {"type": type(exc).__name__, "message": str(exc)}}


def maybe_raise_payload_error(response: dict) -> None:
    err = response.get("_error")
    if not err:
        return
    exc_type = REPLAYABLE_ERRORS.get(err.get("type", ""))
    if exc_type is None:
        raise ProviderUnavailable(err.get("message", "recorded provider failure"), retryable=False)
    raise exc_type(err.get("message", ""))


@runtime_checkable
class Backend(Protocol):
    """One configured capability endpoint."""

    kind: ProviderKind

    def invoke(self, request: dict) -> dict:
        """Execute one call. Raises ProviderError subclasses on failure."""
        ...


@dataclass(frozen=True)
class PageContent:
    """What content extraction recovers from one web page."""

    title: str
    main_text: str
    main_image: Optional[ImageRef] = None
    published_at: Optional[datetime] = None


@dataclass(frozen=True)
class CostTable:
    """Per-provider pricing used by the cost ledger."""

    per_call: float = 0.0
    per_1k_prompt_tokens: float = 0.0
    per_1k_completion_tokens: float = 0.0

    def cost_of(self, prompt_tokens: int, completion_tokens: int) -> float:
        return (
            self.per_call
            + self.per_1k_prompt_tokens * prompt_tokens / 1000.0
            + self.per_1k_completion_tokens * completion_tokens / 1000.0
        )


@dataclass(frozen=True)
class RetryPolicy:
    """Bounded retry with exponential backoff and jitter for transient
    failures; the jitter source is injectable so tests stay deterministic."""

    attempts: int = 3
    base_delay: float = 0.2
    max_delay: float = 5.0
    jitter: float = 0.1

    def delay_for(self, attempt: int, jitter_fraction: float) -> float:
        delay = min(self.base_delay * (2**attempt), self.max_delay)
        return delay * (1.0 + self.jitter * jitter_fraction)


@dataclass
class ProviderSettings:
    """Operator-facing knobs for one provider kind."""

    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""
    max_in_flight: int = 8
    context_limit_chars: int = 120_000
    timeout: float = 30.0
    cost: CostTable = field(default_factory=CostTable)
