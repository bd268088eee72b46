"""Evidence extraction over ranked pages with early stopping.

Pages are walked in credibility-then-relevance order.  Each page yields at
most two explicit-refutation quotes and two implicit/context quotes, every
quote verified verbatim against the (truncated) page text.  The walk stops
once enough distinct pages explicitly refute the post.

Lookahead may run extractions for upcoming pages concurrently, but the stop
decision and the returned items are exactly those of a sequential walk;
lookahead work past the stop point is discarded and tagged speculative.
"""

from __future__ import annotations

import enum
import re
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass

from .models import (
    EvidenceItem,
    EvidenceKind,
    InformativeDescription,
    PipelineConfig,
    Post,
    RetrievedPage,
)
from .prompts import EXTRACTION_PROMPT, article_context, tweet_context_full
from .providers.base import ProviderError, ProviderKind
from .providers.gateway import ProviderGateway


class ExtractionVerdict(enum.Enum):
    REFUTES = "refutes"
    CONTEXT_ONLY = "context_only"
    NONE = "none"


@dataclass(frozen=True)
class ExtractionResult:
    page: RetrievedPage
    items: tuple[EvidenceItem, ...]
    verdict: ExtractionVerdict

    def __post_init__(self) -> None:
        has_explicit = any(i.kind is EvidenceKind.EXPLICIT_REFUTATION for i in self.items)
        if (self.verdict is ExtractionVerdict.REFUTES) != has_explicit:
            raise ValueError("verdict Refutes must match presence of explicit items")
        if (self.verdict is ExtractionVerdict.NONE) != (len(self.items) == 0):
            raise ValueError("verdict None must match empty items")


def rank_pages(pages: list[RetrievedPage]) -> list[RetrievedPage]:
    """Priority tier first, then text relevance descending, then URL as the
    deterministic tie-break."""
    return sorted(pages, key=lambda p: (-p.priority.rank, -p.text_relevance, p.url))


def truncate_at_whitespace(text: str, limit: int) -> str:
    """Cut to at most ``limit`` characters without splitting a word: back up
    to the last whitespace inside the cap, hard-cut only if there is none."""
    if len(text) <= limit:
        return text
    head = text[:limit]
    # Cutting mid-word? step back to the last whitespace run.
    if not text[limit].isspace():
        space = max(head.rfind(ch) for ch in (" ", "\n", "\t"))
        if space > 0:
            head = head[:space]
    return head.rstrip()


_SECTION_RE = re.compile(r"^\s*(1|2)\s*[.):]", re.MULTILINE)
_QUOTE_RE = re.compile(r"[\"“]([^\"“”]+)[\"”]")
_NONE_RE = re.compile(r"^[\s'\"]*none[.\s'\"]*$", re.IGNORECASE)


def _candidates(section: str) -> list[str]:
    """Quote candidates within one numbered section: quoted spans when
    present, otherwise nonempty lines."""
    if _NONE_RE.match(section.strip()):
        return []
    quoted = [m.group(1).strip() for m in _QUOTE_RE.finditer(section)]
    if quoted:
        return [q for q in quoted if q]
    lines = [ln.strip() for ln in section.splitlines()]
    return [ln for ln in lines if ln and not _NONE_RE.match(ln)]


def parse_extraction_reply(reply: str) -> tuple[list[str], list[str]]:
    """Split an extraction reply into explicit and implicit quote candidates,
    at most two of each.  A bare "none" yields nothing."""
    text = reply.strip()
    if _NONE_RE.match(text):
        return [], []
    marks = list(_SECTION_RE.finditer(text))
    if not marks:
        # Unstructured reply: treat all quoted spans as explicit.
        return _candidates(text)[:2], []
    explicit: list[str] = []
    implicit: list[str] = []
    for i, mark in enumerate(marks):
        end = marks[i + 1].start() if i + 1 < len(marks) else len(text)
        body = text[mark.end():end]
        bucket = explicit if mark.group(1) == "1" else implicit
        for candidate in _candidates(body):
            if candidate not in bucket:
                bucket.append(candidate)
    return explicit[:2], implicit[:2]


def extraction_request(
    gateway: ProviderGateway,
    page: RetrievedPage,
    post: Post,
    descriptions: list[InformativeDescription],
    config: PipelineConfig,
) -> dict:
    """The exact chat request ``extract`` will issue for this page."""
    truncated = truncate_at_whitespace(page.main_text, config.max_page_chars)
    context = "\n".join(
        [article_context(truncated, page.published_at), tweet_context_full(post, descriptions)]
    )
    return gateway.chat_request(EXTRACTION_PROMPT, context)


def extract(
    gateway: ProviderGateway,
    page: RetrievedPage,
    post: Post,
    descriptions: list[InformativeDescription],
    config: PipelineConfig,
    *,
    speculative: bool = False,
) -> ExtractionResult:
    """One page through the extraction prompt, quotes verified as substrings
    of the truncated text; fabricated quotes are dropped and flagged."""
    truncated = truncate_at_whitespace(page.main_text, config.max_page_chars)
    request = extraction_request(gateway, page, post, descriptions, config)
    reply = gateway.chat(request["prompt"], request["context"], speculative=speculative)
    explicit, implicit = parse_extraction_reply(reply)

    items: list[EvidenceItem] = []
    for kind, quotes in (
        (EvidenceKind.EXPLICIT_REFUTATION, explicit),
        (EvidenceKind.IMPLICIT_REFUTATION, implicit),
    ):
        for quote in quotes:
            if quote not in truncated:
                gateway.diagnostics.validation_flags.append(
                    f"discarded non-substring quote from {page.url}"
                )
                continue
            items.append(
                EvidenceItem(
                    kind=kind,
                    quotes=(quote,),
                    source_url=page.url,
                    source_priority=page.priority,
                    source_relevance=page.text_relevance,
                    published_at=page.published_at,
                )
            )

    if not items:
        verdict = ExtractionVerdict.NONE
    elif any(i.kind is EvidenceKind.EXPLICIT_REFUTATION for i in items):
        verdict = ExtractionVerdict.REFUTES
    else:
        verdict = ExtractionVerdict.CONTEXT_ONLY
    return ExtractionResult(page=page, items=tuple(items), verdict=verdict)


def gather(
    gateway: ProviderGateway,
    pages: list[RetrievedPage],
    post: Post,
    descriptions: list[InformativeDescription],
    config: PipelineConfig,
) -> tuple[list[EvidenceItem], list[ExtractionResult]]:
    """Walk ranked pages, stopping once refutation_stop_count distinct pages
    explicitly refute.  Returns accumulated items in rank order plus the
    per-page results actually consumed."""
    if config.parallelism <= 1 or len(pages) <= 1:
        return _gather_sequential(gateway, pages, post, descriptions, config)
    return _gather_lookahead(gateway, pages, post, descriptions, config)


def _gather_sequential(
    gateway: ProviderGateway,
    pages: list[RetrievedPage],
    post: Post,
    descriptions: list[InformativeDescription],
    config: PipelineConfig,
) -> tuple[list[EvidenceItem], list[ExtractionResult]]:
    items: list[EvidenceItem] = []
    results: list[ExtractionResult] = []
    refuting = 0
    for page in pages:
        try:
            result = extract(gateway, page, post, descriptions, config)
        except ProviderError as exc:
            gateway.diagnostics.notes.append(f"extraction failed for {page.url}: {exc}")
            continue
        results.append(result)
        items.extend(result.items)
        if result.verdict is ExtractionVerdict.REFUTES:
            refuting += 1
            if refuting >= config.refutation_stop_count:
                break
    return items, results


def _gather_lookahead(
    gateway: ProviderGateway,
    pages: list[RetrievedPage],
    post: Post,
    descriptions: list[InformativeDescription],
    config: PipelineConfig,
) -> tuple[list[EvidenceItem], list[ExtractionResult]]:
    items: list[EvidenceItem] = []
    results: list[ExtractionResult] = []
    refuting = 0
    window = config.parallelism
    futures: dict[int, Future] = {}

    with ThreadPoolExecutor(max_workers=window) as pool:

        def submit(index: int, speculative: bool) -> None:
            futures[index] = pool.submit(
                extract, gateway, pages[index], post, descriptions, config,
                speculative=speculative,
            )

        for i in range(min(window, len(pages))):
            # The head of the window is definitely needed; the rest may fall
            # past the stop point.
            submit(i, speculative=i != 0)

        for frontier in range(len(pages)):
            future = futures.pop(frontier)
            try:
                result = future.result()
            except ProviderError as exc:
                # Same degradation as the sequential walk: skip the page.
                gateway.diagnostics.notes.append(
                    f"extraction failed for {pages[frontier].url}: {exc}"
                )
                result = None
            if result is not None:
                # The call ran under a speculative tag unless it was the
                # window head; consuming it makes it committed work.
                gateway.commit_call(
                    ProviderKind.CHAT_LLM,
                    extraction_request(gateway, pages[frontier], post, descriptions, config),
                )
                results.append(result)
                items.extend(result.items)
                if result.verdict is ExtractionVerdict.REFUTES:
                    refuting += 1
                    if refuting >= config.refutation_stop_count:
                        break
            nxt = frontier + window
            if nxt < len(pages):
                submit(nxt, speculative=True)

        # Drain unconsumed speculative futures so worker errors never escape.
        for future in futures.values():
            try:
                future.result()
            except ProviderError:
                pass

    return items, results
