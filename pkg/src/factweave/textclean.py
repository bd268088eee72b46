"""Denoising helpers: social-media text carries URLs and emoji that add noise
to embeddings and search queries."""

from __future__ import annotations

import re

URL_RE = re.compile(r"""(?:https?://|www\.)[^\s<>"')\]]+""", re.IGNORECASE)

# Pictographs, symbols, flags, and the variation selectors / ZWJ that glue
# them together.
_EMOJI_RE = re.compile(
    "["
    "\U0001f000-\U0001faff"
    "\U00002600-\U000027bf"
    "\U0001f1e6-\U0001f1ff"
    "\U00002190-\U000021ff"
    "\U00002b00-\U00002bff"
    "\U0000fe00-\U0000fe0f"
    "\U0000200d"
    "\U00002764"
    "\U00002122"
    "\U00002139"
    "]+"
)

_WS_RE = re.compile(r"\s+")


def strip_urls(text: str) -> str:
    return URL_RE.sub(" ", text)


def strip_emoji(text: str) -> str:
    return _EMOJI_RE.sub("", text)


def strip_urls_and_emoji(text: str) -> str:
    """Remove URLs and emoji and collapse the leftover whitespace."""
    return _WS_RE.sub(" ", strip_emoji(strip_urls(text))).strip()


def contains_url(text: str) -> bool:
    return URL_RE.search(text) is not None


def contains_emoji(text: str) -> bool:
    return _EMOJI_RE.search(text) is not None
