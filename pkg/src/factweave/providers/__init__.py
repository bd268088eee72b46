from .base import (
    Backend,
    ContextOverflow,
    CostTable,
    ExtractionEmpty,
    FetchFailed,
    PageContent,
    ProviderError,
    ProviderKind,
    ProviderSettings,
    ProviderUnavailable,
    QuotaExceeded,
    RetryPolicy,
)
from .cassette import Cassette, RecordingBackend, ReplayBackend, recording_backends, replay_backends
from .gateway import ProviderGateway

__all__ = [
    "Backend",
    "Cassette",
    "ContextOverflow",
    "CostTable",
    "ExtractionEmpty",
    "FetchFailed",
    "PageContent",
    "ProviderError",
    "ProviderGateway",
    "ProviderKind",
    "ProviderSettings",
    "ProviderUnavailable",
    "QuotaExceeded",
    "RecordingBackend",
    "ReplayBackend",
    "RetryPolicy",
    "recording_backends",
    "replay_backends",
]
