"""Credibility-aware evidence retrieval and misinformation correction, with
an expert-evaluation toolkit."""

from .models import (
    CorrectionResponse,
    Diagnostics,
    EvidenceItem,
    EvidenceKind,
    ImageRef,
    InformativeDescription,
    MalformedPost,
    PipelineConfig,
    Post,
    Priority,
    ProviderCallRecord,
    Query,
    RetrievedPage,
    UnreadableImage,
)

__version__ = "0.1.0"

__all__ = [
    "CorrectionResponse",
    "Diagnostics",
    "EvidenceItem",
    "EvidenceKind",
    "ImageRef",
    "InformativeDescription",
    "MalformedPost",
    "PipelineConfig",
    "Post",
    "Priority",
    "ProviderCallRecord",
    "Query",
    "RetrievedPage",
    "UnreadableImage",
    "__version__",
]
