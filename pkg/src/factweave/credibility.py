"""Publisher credibility registry: factuality/bias ratings, admission, and
the three-tier priority that orders evidence sources.

Ratings are operator-supplied (the rating provider's data is not
redistributable); this module owns only the schema and the admission rules.
Unrated publishers are excluded, fail-closed.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional
from urllib.parse import urlparse

from .models import Priority, content_hash


class MalformedRegistry(ValueError):
    """Raised on duplicate domains or unknown category strings."""


class FactualityRating(enum.Enum):
    VERY_HIGH = "very high"
    HIGH = "high"
    MOSTLY_FACTUAL = "mostly factual"
    MIXED = "mixed"
    LOW = "low"
    VERY_LOW = "very low"


class BiasRating(enum.Enum):
    LEAST_BIASED = "least biased"
    LEFT_CENTER = "left-center"
    RIGHT_CENTER = "right-center"
    LEFT = "left"
    RIGHT = "right"
    EXTREME_LEFT = "extreme left"
    EXTREME_RIGHT = "extreme right"
    PRO_SCIENCE = "pro-science"
    QUESTIONABLE = "questionable"
    SATIRE = "satire"
    CONSPIRACY_PSEUDOSCIENCE = "conspiracy-pseudoscience"


_FACTUALITY_ALIASES = {r.value.replace("-", " "): r for r in FactualityRating}
_BIAS_ALIASES = {r.value.replace("-", " "): r for r in BiasRating}
_BIAS_ALIASES.update(
    {
        "extremely left": BiasRating.EXTREME_LEFT,
        "extremely right": BiasRating.EXTREME_RIGHT,
        "conspiracy pseudoscience": BiasRating.CONSPIRACY_PSEUDOSCIENCE,
    }
)

ADMITTED_FACTUALITY = frozenset(
    {FactualityRating.VERY_HIGH, FactualityRating.HIGH, FactualityRating.MOSTLY_FACTUAL}
)
ADMITTED_BIAS = frozenset(
    {BiasRating.LEAST_BIASED, BiasRating.LEFT_CENTER, BiasRating.RIGHT_CENTER, BiasRating.PRO_SCIENCE}
)
_HIGH_TIER_BIAS = frozenset({BiasRating.LEAST_BIASED, BiasRating.PRO_SCIENCE})


def _normalize_label(raw: str) -> str:
    return " ".join(raw.strip().lower().replace("_", " ").replace("-", " ").split())


def parse_factuality(raw: str) -> FactualityRating:
    try:
        return _FACTUALITY_ALIASES[_normalize_label(raw)]
    except KeyError:
        raise MalformedRegistry(f"unknown factuality category: {raw!r}") from None


def parse_bias(raw: str) -> BiasRating:
    try:
        return _BIAS_ALIASES[_normalize_label(raw)]
    except KeyError:
        raise MalformedRegistry(f"unknown bias category: {raw!r}") from None


def normalize_host(url_or_host: str) -> str:
    """Lowercased hostname with port and a leading www. stripped."""
    candidate = url_or_host.strip()
    if "//" in candidate:
        host = urlparse(candidate).hostname or ""
    else:
        host = candidate.split("/", 1)[0].split(":", 1)[0]
    host = host.lower().rstrip(".")
    if host.startswith("www."):
        host = host[4:]
    return host


# Second-level registries under which a bare two-label suffix is not a
# registrable domain (e.g. bbc.co.uk, not co.uk).
_SECOND_LEVEL = frozenset({"co", "com", "net", "org", "gov", "ac", "edu", "mil"})


def guess_registrable_domain(host: str) -> str:
    """Best-effort registrable domain for hosts absent from the registry."""
    labels = normalize_host(host).split(".")
    if len(labels) <= 2:
        return ".".join(labels)
    if labels[-2] in _SECOND_LEVEL and len(labels[-1]) == 2:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


@dataclass(frozen=True)
class PublisherRecord:
    """One rated publisher."""

    domain: str
    factuality: FactualityRating
    bias: BiasRating

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", normalize_host(self.domain))
        if not self.domain:
            raise MalformedRegistry("publisher record with empty domain")

    def to_dict(self) -> dict:
        return {"domain": self.domain, "factuality": self.factuality.value, "bias": self.bias.value}


def admit(rec: PublisherRecord) -> bool:
    """Whether a publisher may serve as a reference at all."""
    return rec.factuality in ADMITTED_FACTUALITY and rec.bias in ADMITTED_BIAS


def priority(rec: PublisherRecord) -> Priority:
    """Tier assignment: pure function of (factuality, bias)."""
    if not admit(rec):
        return Priority.EXCLUDED
    if rec.factuality is FactualityRating.VERY_HIGH and rec.bias in _HIGH_TIER_BIAS:
        return Priority.HIGH
    if rec.factuality in (FactualityRating.VERY_HIGH, FactualityRating.HIGH):
        return Priority.MEDIUM
    return Priority.LOW


class Registry:
    """Immutable lookup table from registrable domain to publisher rating."""

    def __init__(self, records: Iterable[PublisherRecord]) -> None:
        table: dict[str, PublisherRecord] = {}
        for rec in records:
            if rec.domain in table:
                raise MalformedRegistry(f"duplicate domain: {rec.domain}")
            table[rec.domain] = rec
        self._table = table
        self._snapshot_hash = content_hash(
            sorted((r.domain, r.factuality.value, r.bias.value) for r in table.values())
        )

    def __len__(self) -> int:
        return len(self._table)

    def snapshot_hash(self) -> str:
        return self._snapshot_hash

    def lookup(self, url: str) -> Optional[PublisherRecord]:
        """Find the record for a URL's publisher, normalizing subdomains.

        Matching walks the host suffixes (sub.example.org -> example.org),
        so any registered parent domain claims its subdomains.
        """
        host = normalize_host(url)
        labels = host.split(".")
        for start in range(len(labels) - 1):
            candidate = ".".join(labels[start:])
            rec = self._table.get(candidate)
            if rec is not None:
                return rec
        return self._table.get(host)

    def publisher_domain(self, url: str) -> str:
        rec = self.lookup(url)
        if rec is not None:
            return rec.domain
        return guess_registrable_domain(url)

    def priority_for_url(self, url: str) -> Priority:
        rec = self.lookup(url)
        return priority(rec) if rec is not None else Priority.EXCLUDED

    def admitted_domains(self) -> frozenset[str]:
        return frozenset(d for d, rec in self._table.items() if admit(rec))

    def records(self) -> list[PublisherRecord]:
        return sorted(self._table.values(), key=lambda r: r.domain)


def _record_from_row(row: dict, where: str) -> PublisherRecord:
    missing = [k for k in ("domain", "factuality", "bias") if not row.get(k)]
    if missing:
        raise MalformedRegistry(f"{where}: missing {', '.join(missing)}")
    try:
        return PublisherRecord(
            domain=row["domain"],
            factuality=parse_factuality(row["factuality"]),
            bias=parse_bias(row["bias"]),
        )
    except MalformedRegistry as exc:
        raise MalformedRegistry(f"{where}: {exc}") from None


def load_registry(path: str | Path) -> Registry:
    """Load a registry from CSV (domain,factuality,bias header) or a JSON
    array of records; errors carry the offending line number."""
    path = Path(path)
    records: list[PublisherRecord] = []
    if path.suffix.lower() == ".json":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, list):
            raise MalformedRegistry(f"{path}: expected a JSON array of records")
        for i, row in enumerate(data):
            records.append(_record_from_row(row, f"{path} entry {i}"))
    else:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for i, row in enumerate(reader, start=2):
                records.append(_record_from_row(row, f"{path} line {i}"))
    seen: set[str] = set()
    for rec in records:
        if rec.domain in seen:
            raise MalformedRegistry(f"{path}: duplicate domain {rec.domain}")
        seen.add(rec.domain)
    return Registry(records)
