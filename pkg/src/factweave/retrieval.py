"""Query generation, scoped search, relevance scoring, and the time gate.

Relevance units are whatever the configured text embedder produces under a
dot product, so the thresholds in PipelineConfig only mean anything for the
embedder they were calibrated against; ``check_embedder_pin`` enforces that
binding.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Optional

from .credibility import Registry
from .models import PipelineConfig, Post, Query, RetrievedPage
from .prompts import query_prompt, tweet_context_for_query
from .providers.base import ProviderError, ProviderKind
from .providers.gateway import ProviderGateway, host_in_scope
from .textclean import strip_urls_and_emoji


class EmbedderMismatch(RuntimeError):
    """Config thresholds were calibrated for a different embedding provider."""


class VerdictReason(enum.Enum):
    TEXT_ABOVE_THRESHOLD = "text_above_threshold"
    MULTIMODAL_TEXT_ABOVE = "multimodal_text_above"
    VISUAL_ABOVE = "visual_above"
    BELOW_ALL = "below_all"
    UNDATED = "undated"
    AFTER_CUTOFF = "after_cutoff"


_KEPT_REASONS = {
    VerdictReason.TEXT_ABOVE_THRESHOLD,
    VerdictReason.MULTIMODAL_TEXT_ABOVE,
    VerdictReason.VISUAL_ABOVE,
}


@dataclass(frozen=True)
class RelevanceVerdict:
    text_relevance: float
    visual_relevance: Optional[float]
    kept: bool
    reason: VerdictReason

    def __post_init__(self) -> None:
        if self.kept != (self.reason in _KEPT_REASONS):
            raise ValueError(f"kept={self.kept} inconsistent with reason {self.reason}")


class GateMode(enum.Enum):
    POST_TIME = "post_time"
    MINUTES_BEFORE_REFERENCE = "minutes_before_reference"


@dataclass(frozen=True)
class TimeGate:
    """Publish-date cutoff fixed before any search is issued."""

    cutoff: datetime
    mode: GateMode

    @classmethod
    def at_post_time(cls, post: Post) -> "TimeGate":
        return cls(cutoff=post.created_at, mode=GateMode.POST_TIME)

    @classmethod
    def minutes_before(cls, reference: datetime, minutes: int = 30) -> "TimeGate":
        return cls(
            cutoff=reference - timedelta(minutes=minutes),
            mode=GateMode.MINUTES_BEFORE_REFERENCE,
        )


def gate_from_spec(spec: str, post: Post) -> TimeGate:
    """CLI/API cutoff selector: "post-time" gates at the post's creation;
    an RFC-3339 reference timestamp gates 30 minutes before it."""
    if spec == "post-time":
        return TimeGate.at_post_time(post)
    from .models import parse_timestamp

    return TimeGate.minutes_before(parse_timestamp(spec))


def check_embedder_pin(gateway: ProviderGateway, config: PipelineConfig) -> None:
    if config.embedder_id is None:
        return
    actual = gateway.backend_id(ProviderKind.TEXT_EMBEDDER)
    if actual != config.embedder_id:
        raise EmbedderMismatch(
            f"thresholds calibrated for embedder {config.embedder_id!r}, "
            f"but the gateway provides {actual!r}"
        )


# -- query generation -------------------------------------------------------

_LEADING_DECOR_RE = re.compile(r"^\s*(?:\d+[.):]\s*|[-*•]\s*)")


def _clean_query_line(line: str) -> str:
    text = _LEADING_DECOR_RE.sub("", line).strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in {'"', "'"}:
        text = text[1:-1].strip()
    return text


def parse_query_reply(reply: str, n: int, post_id: str) -> list[Query]:
    """Split a query-generation reply into at most n distinct queries.

    The reply "none" (any case, optional final period) means the post was
    too uninformative to search, which the pipeline maps to the
    lack-of-evidence path.
    """
    stripped = reply.strip()
    if stripped.lower().rstrip(".") in {"none", '"none"', "'none'"}:
        return []
    queries: list[Query] = []
    seen: set[str] = set()
    for line in stripped.splitlines():
        text = _clean_query_line(line)
        if not text or text.lower().rstrip(".") == "none":
            continue
        if text in seen:
            continue
        seen.add(text)
        queries.append(Query(text=text, origin_post=post_id))
        if len(queries) == n:
            break
    return queries


def generate_queries(
    gateway: ProviderGateway,
    post: Post,
    descriptions: list,
    config: PipelineConfig,
) -> list[Query]:
    n = config.queries_with_images if post.has_images else config.queries_text_only
    reply = gateway.chat(query_prompt(n), context=tweet_context_for_query(post, descriptions))
    return parse_query_reply(reply, n, post.id)


# -- search -----------------------------------------------------------------


def _cap_per_priority_tier(
    urls: list[str], registry: Registry, cap: int
) -> list[str]:
    """Keep at most ``cap`` links of each publisher-priority tier, preserving
    provider order within the tier."""
    kept: list[str] = []
    counts: dict[str, int] = {}
    for url in urls:
        tier = registry.priority_for_url(url).value
        if counts.get(tier, 0) < cap:
            counts[tier] = counts.get(tier, 0) + 1
            kept.append(url)
    return kept


def run_search(
    gateway: ProviderGateway,
    queries: list[Query],
    post: Post,
    registry: Registry,
    config: PipelineConfig,
) -> list[str]:
    """Text search per query plus reverse-image search per post image,
    deduplicated by first appearance.

    Provider failures on one query or image degrade to partial results; the
    outage is noted in diagnostics rather than failing the run.
    """
    scope = registry.admitted_domains()
    results: list[str] = []
    seen: set[str] = set()

    def add(urls: list[str]) -> None:
        for url in urls:
            if url not in seen:
                seen.add(url)
                results.append(url)

    for query in queries:
        try:
            hits = gateway.search_text(query, scope)
        except ProviderError as exc:
            gateway.diagnostics.notes.append(f"search failed for {query.text!r}: {exc}")
            continue
        add(_cap_per_priority_tier(hits, registry, config.max_links_same_priority))

    for image in post.images:
        try:
            hits = gateway.search_reverse_image(image, config.reverse_image_max_pages)
        except ProviderError as exc:
            gateway.diagnostics.notes.append(
                f"reverse-image search failed for {image.sha256[:12]}: {exc}"
            )
            continue
        # This engine cannot be scoped at request time; filter here.
        add([url for url in hits if host_in_scope(url, scope)])

    return results


# -- relevance --------------------------------------------------------------


def dot(a: list[float], b: list[float]) -> float:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return math.fsum(x * y for x, y in zip(a, b))


def cosine(a: list[float], b: list[float]) -> float:
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot(a, b) / (na * nb)


@dataclass(frozen=True)
class PostVectors:
    """The post's embeddings, computed once per run."""

    text: list[float]
    images: tuple[tuple[str, list[float]], ...]  # (sha256, vector)


def embed_post(gateway: ProviderGateway, post: Post) -> PostVectors:
    cleaned = strip_urls_and_emoji(post.text)
    if not cleaned:
        # A post that is all links and emoji still needs a text vector;
        # fall back to the raw text so scoring stays total.
        cleaned = post.text.strip() or post.id
    text_vec = gateway.embed_text(cleaned)
    image_vecs = tuple(
        (image.sha256, gateway.embed_image(image)) for image in post.images
    )
    return PostVectors(text=text_vec, images=image_vecs)


def score_relevance(
    gateway: ProviderGateway,
    post: Post,
    page: RetrievedPage,
    config: PipelineConfig,
    vectors: Optional[PostVectors] = None,
) -> RelevanceVerdict:
    """Dot-product text relevance with the multimodal escape hatch.

    Text-only posts keep a page iff text relevance meets
    text_relevance_threshold.  Posts with images keep a page iff text
    relevance meets multimodal_text_threshold, or any post image's cosine
    against the page's lead image meets visual_threshold.
    """
    if not page.main_text:
        raise ValueError(f"page {page.url} has no main text to score")
    if vectors is None:
        vectors = embed_post(gateway, post)

    page_vec = gateway.embed_text(page.main_text)
    text_relevance = dot(vectors.text, page_vec)

    if not post.has_images:
        if text_relevance >= config.text_relevance_threshold:
            return RelevanceVerdict(text_relevance, None, True, VerdictReason.TEXT_ABOVE_THRESHOLD)
        return RelevanceVerdict(text_relevance, None, False, VerdictReason.BELOW_ALL)

    visual: Optional[float] = None
    if page.main_image is not None and vectors.images:
        page_image_vec = gateway.embed_image(page.main_image)
        visual = max(cosine(vec, page_image_vec) for _, vec in vectors.images)

    if text_relevance >= config.multimodal_text_threshold:
        return RelevanceVerdict(text_relevance, visual, True, VerdictReason.MULTIMODAL_TEXT_ABOVE)
    if visual is not None and visual >= config.visual_threshold:
        return RelevanceVerdict(text_relevance, visual, True, VerdictReason.VISUAL_ABOVE)
    return RelevanceVerdict(text_relevance, visual, False, VerdictReason.BELOW_ALL)


# -- time gate --------------------------------------------------------------


def gate_reason(page: RetrievedPage, gate: TimeGate) -> Optional[VerdictReason]:
    """None when the page passes the gate, else why it was dropped."""
    if page.published_at is None:
        return VerdictReason.UNDATED
    if page.published_at >= gate.cutoff:
        return VerdictReason.AFTER_CUTOFF
    return None


def apply_time_gate(pages: list[RetrievedPage], gate: TimeGate) -> list[RetrievedPage]:
    """Keep exactly the pages published strictly before the cutoff; undated
    pages are dropped, never given the benefit of the doubt."""
    return [page for page in pages if gate_reason(page, gate) is None]
