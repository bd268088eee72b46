"""End-to-end wiring: describe, query, search, fetch, score, gate, rank,
extract, respond; plus run persistence and batch execution.

A run is addressed by (post id, config hash, cutoff), so identical requests
reuse the persisted record instead of re-spending provider calls.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

from .credibility import Registry
from .describe import describe_all
from .evidence import gather, rank_pages
from .models import (
    CorrectionResponse,
    Diagnostics,
    InformativeDescription,
    PipelineConfig,
    Post,
    Priority,
    Query,
    RetrievedPage,
    content_hash,
    format_timestamp,
    parse_timestamp,
)
from .providers.base import ProviderError
from .providers.gateway import ProviderGateway
from .respond import FormatViolation, generate, generate_no_evidence
from .retrieval import (
    TimeGate,
    apply_time_gate,
    check_embedder_pin,
    embed_post,
    generate_queries,
    run_search,
    score_relevance,
)


def run_key(post_id: str, config_hash: str, cutoff: datetime) -> str:
    return content_hash(
        {"post_id": post_id, "config": config_hash, "cutoff": format_timestamp(cutoff)}
    )


@dataclass(frozen=True)
class RunRecord:
    """One persisted pipeline execution."""

    post_id: str
    config_hash: str
    registry_hash: str
    cutoff: datetime
    created_at: datetime
    status: str  # "ok" | "failed"
    response: Optional[CorrectionResponse] = None
    error: Optional[str] = None
    cassette_id: Optional[str] = None

    @property
    def key(self) -> str:
        return run_key(self.post_id, self.config_hash, self.cutoff)

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "config_hash": self.config_hash,
            "registry_hash": self.registry_hash,
            "cutoff": format_timestamp(self.cutoff),
            "created_at": format_timestamp(self.created_at),
            "status": self.status,
            "response": self.response.to_dict() if self.response else None,
            "error": self.error,
            "cassette_id": self.cassette_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            post_id=d["post_id"],
            config_hash=d["config_hash"],
            registry_hash=d["registry_hash"],
            cutoff=parse_timestamp(d["cutoff"]),
            created_at=parse_timestamp(d["created_at"]),
            status=d["status"],
            response=CorrectionResponse.from_dict(d["response"]) if d.get("response") else None,
            error=d.get("error"),
            cassette_id=d.get("cassette_id"),
        )


class RunStore:
    """Append-only directory of run records plus a JSONL index.

    Records are immutable once written; writing an existing key is a no-op,
    so concurrent duplicate runs settle on first-writer-wins.
    """

    def __init__(self, root: Union[str, Path]) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "records").mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self.hits = 0

    def _path(self, key: str) -> Path:
        return self.root / "records" / f"{key}.json"

    def load(self, key: str) -> Optional[RunRecord]:
        """Plain read with no cache accounting."""
        path = self._path(key)
        if not path.exists():
            return None
        return RunRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def get(self, key: str) -> Optional[RunRecord]:
        """Read that counts as a cache hit when the record exists."""
        record = self.load(key)
        if record is not None:
            with self._lock:
                self.hits += 1
        return record

    def put(self, record: RunRecord) -> None:
        path = self._path(record.key)
        with self._lock:
            if path.exists():
                return
            path.write_text(
                json.dumps(record.to_dict(), ensure_ascii=False, indent=2), encoding="utf-8"
            )
            with (self.root / "index.jsonl").open("a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "key": record.key,
                            "post_id": record.post_id,
                            "status": record.status,
                            "created_at": format_timestamp(record.created_at),
                        }
                    )
                    + "\n"
                )

    def keys(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "records").glob("*.json"))


def respond_to_post(
    gateway: ProviderGateway,
    registry: Registry,
    config: PipelineConfig,
    post: Post,
    gate: TimeGate,
) -> CorrectionResponse:
    """The full correction pipeline for one post, bound to a fresh
    diagnostics trail."""
    diagnostics = Diagnostics(cutoff=gate.cutoff)
    g = gateway.for_run(diagnostics)
    started = time.monotonic()
    try:
        check_embedder_pin(g, config)

        descriptions, queries, ranked = survey_pages(g, registry, config, post, gate)
        if not queries:
            return generate_no_evidence(g, post)

        evidence, results = gather(g, ranked, post, descriptions, config)
        diagnostics.pages_extracted = len(results)

        if not evidence:
            return generate_no_evidence(g, post)
        return generate(g, post, evidence, descriptions)
    finally:
        diagnostics.wall_time = time.monotonic() - started


def survey_pages(
    gateway: ProviderGateway,
    registry: Registry,
    config: PipelineConfig,
    post: Post,
    gate: TimeGate,
) -> tuple[list[InformativeDescription], list[Query], list[RetrievedPage]]:
    """The front half of the pipeline: describe, query, search, fetch,
    score, time-gate, rank.  Empty queries mean the post was uninformative;
    callers take the no-evidence path."""
    descriptions = describe_all(gateway, post, config.parallelism)
    queries = generate_queries(gateway, post, descriptions, config)
    if not queries:
        return descriptions, [], []

    urls = run_search(gateway, queries, post, registry, config)
    gateway.diagnostics.pages_searched = len(urls)
    pages = _fetch_pages(gateway, registry, urls, config)
    scored: list[RetrievedPage] = []
    if pages:
        vectors = embed_post(gateway, post)
        verdicts = _map_bounded(
            lambda page: score_relevance(gateway, post, page, config, vectors),
            pages,
            config.parallelism,
        )
        for page, verdict in zip(pages, verdicts):
            if isinstance(verdict, Exception):
                gateway.diagnostics.notes.append(
                    f"scoring failed for {page.url}: {verdict}"
                )
                continue
            if verdict.kept:
                scored.append(
                    RetrievedPage(
                        url=page.url,
                        publisher_domain=page.publisher_domain,
                        title=page.title,
                        main_text=page.main_text,
                        main_image=page.main_image,
                        published_at=page.published_at,
                        text_relevance=verdict.text_relevance,
                        visual_relevance=verdict.visual_relevance,
                        priority=page.priority,
                    )
                )

    gated = apply_time_gate(scored, gate)
    gateway.diagnostics.pages_kept = len(gated)
    return descriptions, queries, rank_pages(gated)


def _fetch_pages(
    gateway: ProviderGateway,
    registry: Registry,
    urls: list[str],
    config: PipelineConfig,
) -> list[RetrievedPage]:
    """Fetch and extract page content concurrently, preserving URL order.
    Fetch and extraction failures drop the page, never the run."""

    def fetch(url: str) -> Optional[RetrievedPage]:
        priority = registry.priority_for_url(url)
        if priority is Priority.EXCLUDED:
            return None
        content = gateway.extract_content(url)
        if not content.main_text:
            return None
        return RetrievedPage(
            url=url,
            publisher_domain=registry.publisher_domain(url),
            title=content.title,
            main_text=content.main_text,
            main_image=content.main_image,
            published_at=content.published_at,
            priority=priority,
        )

    outcomes = _map_bounded(fetch, urls, config.parallelism)
    pages: list[RetrievedPage] = []
    for url, outcome in zip(urls, outcomes):
        if isinstance(outcome, Exception):
            gateway.diagnostics.notes.append(f"fetch failed for {url}: {outcome}")
        elif outcome is not None:
            pages.append(outcome)
    return pages


def _map_bounded(fn, items, parallelism: int) -> list:
    """Ordered map with a worker bound; exceptions come back as values so the
    caller can degrade per item."""

    def safe(item):
        try:
            return fn(item)
        except ProviderError as exc:
            return exc

    items = list(items)
    if parallelism <= 1 or len(items) <= 1:
        return [safe(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(parallelism, len(items))) as pool:
        return list(pool.map(safe, items))


def run_pipeline(
    gateway: ProviderGateway,
    registry: Registry,
    config: PipelineConfig,
    post: Post,
    gate: TimeGate,
    store: Optional[RunStore] = None,
    cassette_id: Optional[str] = None,
) -> RunRecord:
    """Execute (or reuse) one run and persist its record."""
    key = run_key(post.id, config.snapshot_hash(), gate.cutoff)
    if store is not None:
        cached = store.get(key)
        if cached is not None:
            return cached

    try:
        response = respond_to_post(gateway, registry, config, post, gate)
        record = RunRecord(
            post_id=post.id,
            config_hash=config.snapshot_hash(),
            registry_hash=registry.snapshot_hash(),
            cutoff=gate.cutoff,
            created_at=datetime.now(timezone.utc),
            status="ok",
            response=response,
            cassette_id=cassette_id,
        )
    except (ProviderError, FormatViolation, ValueError) as exc:
        record = RunRecord(
            post_id=post.id,
            config_hash=config.snapshot_hash(),
            registry_hash=registry.snapshot_hash(),
            cutoff=gate.cutoff,
            created_at=datetime.now(timezone.utc),
            status="failed",
            error=f"{type(exc).__name__}: {exc}",
            cassette_id=cassette_id,
        )

    if store is not None:
        store.put(record)
    return record


def run_batch(
    gateway: ProviderGateway,
    registry: Registry,
    config: PipelineConfig,
    posts: list[Post],
    gate_for: "callable",
    store: Optional[RunStore] = None,
    cassette_id: Optional[str] = None,
) -> list[RunRecord]:
    """Run many posts with at most config.parallelism in flight; output order
    always equals input order, and per-post failures never stop the batch.

    ``gate_for`` maps each post to its TimeGate (e.g. TimeGate.at_post_time).
    """
    if not posts:
        return []

    def one(post: Post) -> RunRecord:
        return run_pipeline(gateway, registry, config, post, gate_for(post), store, cassette_id)

    if config.parallelism <= 1 or len(posts) == 1:
        return [one(post) for post in posts]
    with ThreadPoolExecutor(max_workers=min(config.parallelism, len(posts))) as pool:
        return list(pool.map(one, posts))
