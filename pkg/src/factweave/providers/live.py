"""HTTP adapters for real provider endpoints.

Each adapter converts the gateway's request dicts into one HTTP call.  The
test suite never touches these directly; they exist so a cassette can be
recorded against real services, and are covered by contract tests against
local fixture servers only.
"""

from __future__ import annotations

import base64
import os
from dataclasses import dataclass
from typing import Optional

import httpx

from .base import (
    FetchFailed,
    ProviderKind,
    ProviderSettings,
    ProviderUnavailable,
    QuotaExceeded,
)
from ..extracthtml import extract_page

_RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}


def _check_response(resp: httpx.Response) -> None:
    if resp.status_code == 429:
        raise QuotaExceeded(f"{resp.request.url}: rate limited")
    if resp.status_code >= 400:
        raise ProviderUnavailable(
            f"{resp.request.url}: HTTP {resp.status_code}",
            retryable=resp.status_code in _RETRYABLE_STATUS,
        )


@dataclass
class _HttpBackend:
    settings: ProviderSettings
    client: Optional[httpx.Client] = None

    def __post_init__(self) -> None:
        if self.client is None:
            self.client = httpx.Client(timeout=self.settings.timeout)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.settings.api_key_env:
            key = os.environ.get(self.settings.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, payload: dict) -> dict:
        try:
            resp = self.client.post(
                self.settings.endpoint, json=payload, headers=self._headers()
            )
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(str(exc), retryable=True) from exc
        _check_response(resp)
        return resp.json()


class OpenAiChatBackend(_HttpBackend):
    """Chat-completions wire format."""

    kind = ProviderKind.CHAT_LLM

    def invoke(self, request: dict) -> dict:
        messages = []
        if request.get("context"):
            messages.append({"role": "system", "content": request["context"]})
        messages.append({"role": "user", "content": request["prompt"]})
        body = self._post({"model": self.settings.model, "messages": messages})
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed chat response: {exc}", retryable=False) from exc
        out = {"text": text}
        usage = body.get("usage")
        if isinstance(usage, dict):
            out["_usage"] = {
                "prompt_tokens": int(usage.get("prompt_tokens", 0)),
                "completion_tokens": int(usage.get("completion_tokens", 0)),
            }
        return out


class OpenAiEmbeddingBackend(_HttpBackend):
    kind = ProviderKind.TEXT_EMBEDDER

    def invoke(self, request: dict) -> dict:
        body = self._post({"model": self.settings.model, "input": request["text"]})
        try:
            vector = body["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(
                f"malformed embedding response: {exc}", retryable=False
            ) from exc
        return {"vector": [float(v) for v in vector]}


@dataclass
class JsonPostBackend(_HttpBackend):
    """Generic adapter for vision and search endpoints that accept our
    request dicts natively and answer with the response dict the gateway
    expects.  The provider kind is part of the configuration."""

    provider_kind: ProviderKind = ProviderKind.CAPTIONER

    @property
    def kind(self) -> ProviderKind:
        return self.provider_kind

    def invoke(self, request: dict) -> dict:
        payload = dict(request)
        if self.settings.model:
            payload["model"] = self.settings.model
        return self._post(payload)


@dataclass
class HttpContentExtractor:
    """Fetches a URL and runs the local HTML extractor over it."""

    timeout: float = 30.0
    client: Optional[httpx.Client] = None

    kind = ProviderKind.CONTENT_EXTRACTOR

    def __post_init__(self) -> None:
        if self.client is None:
            self.client = httpx.Client(timeout=self.timeout, follow_redirects=True)

    def invoke(self, request: dict) -> dict:
        url = request["url"]
        try:
            resp = self.client.get(url)
        except httpx.HTTPError as exc:
            raise FetchFailed(f"{url}: {exc}") from exc
        if resp.status_code >= 400:
            raise FetchFailed(f"{url}: HTTP {resp.status_code}")
        page = extract_page(resp.text, url)

        out: dict = {"title": page.title, "main_text": page.main_text}
        if page.published_at is not None:
            from ..models import format_timestamp

            out["published_at"] = format_timestamp(page.published_at)

        from ..extracthtml import extract_og_image_url

        image_url = extract_og_image_url(resp.text)
        if image_url:
            try:
                img = self.client.get(image_url)
                if img.status_code < 400 and img.content:
                    out["main_image_b64"] = base64.b64encode(img.content).decode("ascii")
                    out["main_image_uri"] = image_url
            except httpx.HTTPError:
                pass  # a missing lead image never fails the page
        return out


def live_backends(
    settings: dict[ProviderKind, ProviderSettings]
) -> dict[ProviderKind, object]:
    """Instantiate adapters for every configured kind."""
    out: dict[ProviderKind, object] = {}
    for kind, conf in settings.items():
        if kind == ProviderKind.CHAT_LLM:
            out[kind] = OpenAiChatBackend(conf)
        elif kind == ProviderKind.TEXT_EMBEDDER:
            out[kind] = OpenAiEmbeddingBackend(conf)
        elif kind == ProviderKind.CONTENT_EXTRACTOR:
            out[kind] = HttpContentExtractor(timeout=conf.timeout)
        else:
            out[kind] = JsonPostBackend(conf, provider_kind=kind)
    return out
