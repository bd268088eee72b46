"""Core domain types shared by the retrieval pipeline and the evaluation toolkit.

All types are immutable value objects with deterministic JSON codecs:
``to_dict`` emits plain JSON-safe dicts and ``from_dict`` reverses it
bit-exactly, so runs can be persisted, diffed, and replayed.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Optional


class MalformedPost(ValueError):
    """Raised when an ingestion record is missing required fields."""


class UnreadableImage(ValueError):
    """Raised when an image locator cannot be fetched or decoded."""


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC-3339 timestamp into an aware UTC datetime."""
    if not isinstance(value, str) or not value:
        raise ValueError(f"not a timestamp: {value!r}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat()


def canonical_json(payload: Any) -> str:
    """Stable JSON encoding: sorted keys, no trailing whitespace drift."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ": "))


def content_hash(payload: Any) -> str:
    """SHA-256 over the canonical JSON encoding of ``payload``."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ImageRef:
    """Content-addressed handle on an image: locator plus SHA-256 of its bytes."""

    uri: str
    sha256: str

    def to_dict(self) -> dict:
        return {"uri": self.uri, "sha256": self.sha256}

    @classmethod
    def from_dict(cls, d: dict) -> "ImageRef":
        return cls(uri=d["uri"], sha256=d["sha256"])


@dataclass(frozen=True)
class Post:
    """A social-media item under scrutiny: the pipeline input."""

    id: str
    text: str
    created_at: datetime
    author_name: str
    author_screen_name: str = ""
    author_description: str = ""
    images: tuple[ImageRef, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise MalformedPost("post id must be nonempty")
        if self.created_at.tzinfo is None:
            raise MalformedPost("created_at must be timezone-aware")

    @property
    def has_images(self) -> bool:
        return bool(self.images)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "created_at": format_timestamp(self.created_at),
            "author_name": self.author_name,
            "author_screen_name": self.author_screen_name,
            "author_description": self.author_description,
            "images": [ref.to_dict() for ref in self.images],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Post":
        return cls(
            id=d["id"],
            text=d["text"],
            created_at=parse_timestamp(d["created_at"]),
            author_name=d["author_name"],
            author_screen_name=d.get("author_screen_name", ""),
            author_description=d.get("author_description", ""),
            images=tuple(ImageRef.from_dict(r) for r in d.get("images", [])),
        )


@dataclass(frozen=True)
class InformativeDescription:
    """An image rendered as text: caption, recognized names, and embedded text
    fused into a single description usable by text-only language models."""

    image: ImageRef
    caption: str
    celebrities: tuple[str, ...]
    ocr_text: str
    description: str

    def __post_init__(self) -> None:
        if (self.caption or self.celebrities or self.ocr_text) and not self.description:
            raise ValueError("description must be nonempty when any input signal is nonempty")

    def to_dict(self) -> dict:
        return {
            "image": self.image.to_dict(),
            "caption": self.caption,
            "celebrities": list(self.celebrities),
            "ocr_text": self.ocr_text,
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InformativeDescription":
        return cls(
            image=ImageRef.from_dict(d["image"]),
            caption=d["caption"],
            celebrities=tuple(d["celebrities"]),
            ocr_text=d["ocr_text"],
            description=d["description"],
        )


@dataclass(frozen=True)
class Query:
    """A denoised web-search query generated from a post."""

    text: str
    origin_post: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("query text must be nonempty")

    def to_dict(self) -> dict:
        return {"text": self.text, "origin_post": self.origin_post}

    @classmethod
    def from_dict(cls, d: dict) -> "Query":
        return cls(text=d["text"], origin_post=d["origin_post"])


class Priority(enum.Enum):
    """Publisher tier governing evidence-extraction order.

    Total order High > Medium > Low; Excluded compares below all and never
    reaches evidence extraction.
    """

    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"
    EXCLUDED = "excluded"

    @property
    def rank(self) -> int:
        return _PRIORITY_RANK[self]

    def __lt__(self, other: "Priority") -> bool:
        if not isinstance(other, Priority):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other: "Priority") -> bool:
        if not isinstance(other, Priority):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other: "Priority") -> bool:
        if not isinstance(other, Priority):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other: "Priority") -> bool:
        if not isinstance(other, Priority):
            return NotImplemented
        return self.rank >= other.rank


_PRIORITY_RANK = {
    Priority.HIGH: 3,
    Priority.MEDIUM: 2,
    Priority.LOW: 1,
    Priority.EXCLUDED: 0,
}


@dataclass(frozen=True)
class RetrievedPage:
    """A scraped web document with publisher identity, dates, and scores."""

    url: str
    publisher_domain: str
    title: str
    main_text: str
    main_image: Optional[ImageRef] = None
    published_at: Optional[datetime] = None
    text_relevance: float = 0.0
    visual_relevance: Optional[float] = None
    priority: Priority = Priority.EXCLUDED

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "publisher_domain": self.publisher_domain,
            "title": self.title,
            "main_text": self.main_text,
            "main_image": self.main_image.to_dict() if self.main_image else None,
            "published_at": format_timestamp(self.published_at) if self.published_at else None,
            "text_relevance": self.text_relevance,
            "visual_relevance": self.visual_relevance,
            "priority": self.priority.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RetrievedPage":
        return cls(
            url=d["url"],
            publisher_domain=d["publisher_domain"],
            title=d["title"],
            main_text=d["main_text"],
            main_image=ImageRef.from_dict(d["main_image"]) if d.get("main_image") else None,
            published_at=parse_timestamp(d["published_at"]) if d.get("published_at") else None,
            text_relevance=d["text_relevance"],
            visual_relevance=d.get("visual_relevance"),
            priority=Priority(d["priority"]),
        )


class EvidenceKind(enum.Enum):
    EXPLICIT_REFUTATION = "explicit_refutation"
    IMPLICIT_REFUTATION = "implicit_refutation"


@dataclass(frozen=True)
class EvidenceItem:
    """A quoted passage (refutation or context) with its source and date."""

    kind: EvidenceKind
    quotes: tuple[str, ...]
    source_url: str
    source_priority: Priority
    source_relevance: float
    published_at: Optional[datetime] = None

    def __post_init__(self) -> None:
        if not 1 <= len(self.quotes) <= 2:
            raise ValueError("an evidence item carries one or two quotes")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "quotes": list(self.quotes),
            "source_url": self.source_url,
            "source_priority": self.source_priority.value,
            "source_relevance": self.source_relevance,
            "published_at": format_timestamp(self.published_at) if self.published_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvidenceItem":
        return cls(
            kind=EvidenceKind(d["kind"]),
            quotes=tuple(d["quotes"]),
            source_url=d["source_url"],
            source_priority=Priority(d["source_priority"]),
            source_relevance=d["source_relevance"],
            published_at=parse_timestamp(d["published_at"]) if d.get("published_at") else None,
        )


@dataclass(frozen=True)
class ProviderCallRecord:
    """One call to an external capability, as seen by the diagnostics trail."""

    kind: str
    request_digest: str
    response_digest: str
    latency: float
    cost: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    speculative: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "request_digest": self.request_digest,
            "response_digest": self.response_digest,
            "latency": self.latency,
            "cost": self.cost,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "speculative": self.speculative,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderCallRecord":
        return cls(
            kind=d["kind"],
            request_digest=d["request_digest"],
            response_digest=d["response_digest"],
            latency=d["latency"],
            cost=d.get("cost", 0.0),
            prompt_tokens=d.get("prompt_tokens", 0),
            completion_tokens=d.get("completion_tokens", 0),
            speculative=d.get("speculative", False),
        )


@dataclass
class Diagnostics:
    """Run accounting: provider calls, cost, page counters, and the time gate.

    Mutable during a run; counters only ever increase.  ``stable_dict``
    excludes wall-clock measurements so replayed runs compare byte-identically.
    """

    cutoff: Optional[datetime] = None
    wall_time: float = 0.0
    pages_searched: int = 0
    pages_kept: int = 0
    pages_extracted: int = 0
    cache_hits: int = 0
    calls: list[ProviderCallRecord] = field(default_factory=list)
    validation_flags: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def record_call(self, record: ProviderCallRecord) -> None:
        self.calls.append(record)

    @property
    def provider_calls(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self.calls:
            if not rec.speculative:
                counts[rec.kind] = counts.get(rec.kind, 0) + 1
        return counts

    @property
    def speculative_calls(self) -> int:
        return sum(1 for rec in self.calls if rec.speculative)

    @property
    def monetary_cost(self) -> float:
        return sum(rec.cost for rec in self.calls if not rec.speculative)

    @property
    def speculative_cost(self) -> float:
        return sum(rec.cost for rec in self.calls if rec.speculative)

    @property
    def token_usage(self) -> dict[str, int]:
        return {
            "prompt": sum(r.prompt_tokens for r in self.calls),
            "completion": sum(r.completion_tokens for r in self.calls),
        }

    def stable_dict(self) -> dict:
        """Diagnostics minus wall-clock and speculative artifacts.

        Speculative lookahead may issue extra provider calls depending on the
        configured parallelism; only committed work belongs in the replay-
        comparable view.
        """
        return {
            "cutoff": format_timestamp(self.cutoff) if self.cutoff else None,
            "pages_searched": self.pages_searched,
            "pages_kept": self.pages_kept,
            "pages_extracted": self.pages_extracted,
            "provider_calls": self.provider_calls,
            "monetary_cost": self.monetary_cost,
            "validation_flags": list(self.validation_flags),
        }

    def to_dict(self) -> dict:
        return {
            **self.stable_dict(),
            "wall_time": self.wall_time,
            "cache_hits": self.cache_hits,
            "speculative_calls": self.speculative_calls,
            "speculative_cost": self.speculative_cost,
            "token_usage": self.token_usage,
            "calls": [c.to_dict() for c in self.calls],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Diagnostics":
        diag = cls(
            cutoff=parse_timestamp(d["cutoff"]) if d.get("cutoff") else None,
            wall_time=d.get("wall_time", 0.0),
            pages_searched=d.get("pages_searched", 0),
            pages_kept=d.get("pages_kept", 0),
            pages_extracted=d.get("pages_extracted", 0),
            cache_hits=d.get("cache_hits", 0),
            calls=[ProviderCallRecord.from_dict(c) for c in d.get("calls", [])],
            validation_flags=list(d.get("validation_flags", [])),
            notes=list(d.get("notes", [])),
        )
        return diag


@dataclass(frozen=True)
class CorrectionResponse:
    """The generated correction: text, ordered references, and its evidence."""

    text: str
    references: tuple[str, ...]
    evidence_trail: tuple[EvidenceItem, ...]
    lack_of_evidence: bool
    diagnostics: Diagnostics

    def stable_dict(self) -> dict:
        """Replay-comparable view: everything except wall-clock measurements."""
        return {
            "text": self.text,
            "references": list(self.references),
            "evidence_trail": [e.to_dict() for e in self.evidence_trail],
            "lack_of_evidence": self.lack_of_evidence,
            "diagnostics": self.diagnostics.stable_dict(),
        }

    def stable_json(self) -> str:
        return canonical_json(self.stable_dict())

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "references": list(self.references),
            "evidence_trail": [e.to_dict() for e in self.evidence_trail],
            "lack_of_evidence": self.lack_of_evidence,
            "diagnostics": self.diagnostics.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorrectionResponse":
        return cls(
            text=d["text"],
            references=tuple(d["references"]),
            evidence_trail=tuple(EvidenceItem.from_dict(e) for e in d["evidence_trail"]),
            lack_of_evidence=d["lack_of_evidence"],
            diagnostics=Diagnostics.from_dict(d["diagnostics"]),
        )


@dataclass(frozen=True)
class PipelineConfig:
    """All tunable pipeline constants.

    Relevance thresholds are expressed in the units of the configured
    embedding provider; ``embedder_id``, when set, pins the provider identity
    the thresholds were calibrated for, and the pipeline refuses to run
    against a different embedder.
    """

    queries_text_only: int = 3
    queries_with_images: int = 5
    max_links_same_priority: int = 10
    reverse_image_max_pages: int = 5
    text_relevance_threshold: float = 90.0
    multimodal_text_threshold: float = 95.0
    visual_threshold: float = 0.7
    max_page_chars: int = 20000
    refutation_stop_count: int = 2
    parallelism: int = 5
    embedder_id: Optional[str] = None

    def __post_init__(self) -> None:
        for name in (
            "queries_text_only",
            "queries_with_images",
            "max_links_same_priority",
            "reverse_image_max_pages",
            "text_relevance_threshold",
            "multimodal_text_threshold",
            "visual_threshold",
            "max_page_chars",
            "refutation_stop_count",
            "parallelism",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {
            "queries_text_only": self.queries_text_only,
            "queries_with_images": self.queries_with_images,
            "max_links_same_priority": self.max_links_same_priority,
            "reverse_image_max_pages": self.reverse_image_max_pages,
            "text_relevance_threshold": self.text_relevance_threshold,
            "multimodal_text_threshold": self.multimodal_text_threshold,
            "visual_threshold": self.visual_threshold,
            "max_page_chars": self.max_page_chars,
            "refutation_stop_count": self.refutation_stop_count,
            "parallelism": self.parallelism,
            "embedder_id": self.embedder_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f: d[f] for f in cls.__dataclass_fields__ if f in d}
        return cls(**known)

    def snapshot_hash(self) -> str:
        return content_hash(self.to_dict())

    def with_parallelism(self, parallelism: int) -> "PipelineConfig":
        return replace(self, parallelism=parallelism)
