"""Post ingestion: parse external JSON records into validated Posts and load
their images into a content-addressed media store."""

from __future__ import annotations

import base64
import hashlib
import io
import json
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import urlparse

from PIL import Image, UnidentifiedImageError

from .models import ImageRef, MalformedPost, Post, UnreadableImage, parse_timestamp

FetchFn = Callable[[str], bytes]


class MediaStore:
    """In-memory blob store keyed by SHA-256 digest.

    Image bytes enter once at ingestion (or page extraction) and are looked
    up by every provider that needs pixels, so identical images are fetched
    and hashed exactly once.
    """

    def __init__(self) -> None:
        self._blobs: dict[str, bytes] = {}

    def put(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        self._blobs[digest] = data
        return digest

    def get(self, digest: str) -> bytes:
        try:
            return self._blobs[digest]
        except KeyError:
            raise UnreadableImage(f"no media with digest {digest}") from None

    def __contains__(self, digest: str) -> bool:
        return digest in self._blobs

    def __len__(self) -> int:
        return len(self._blobs)


def default_fetcher(uri: str) -> bytes:
    """Resolve local locators: plain paths, file:// URIs, and data: URIs.

    Remote http(s) locators are intentionally not handled here; a network
    fetcher can be injected where live scraping is configured.
    """
    parsed = urlparse(uri)
    if parsed.scheme in ("", "file"):
        path = Path(parsed.path if parsed.scheme == "file" else uri)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise UnreadableImage(f"cannot read image at {uri}: {exc}") from exc
    if parsed.scheme == "data":
        try:
            header, payload = uri.split(",", 1)
        except ValueError as exc:
            raise UnreadableImage(f"malformed data URI: {uri[:40]}") from exc
        if header.endswith(";base64"):
            try:
                return base64.b64decode(payload, validate=True)
            except Exception as exc:
                raise UnreadableImage("undecodable base64 data URI") from exc
        return payload.encode("utf-8")
    raise UnreadableImage(f"unsupported image locator scheme: {parsed.scheme!r}")


def decode_check(data: bytes) -> None:
    """Reject bytes that no image codec understands."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.verify()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UnreadableImage(f"undecodable image bytes: {exc}") from exc


def load_image(uri: str, store: MediaStore, fetch: Optional[FetchFn] = None) -> ImageRef:
    data = (fetch or default_fetcher)(uri)
    decode_check(data)
    digest = store.put(data)
    return ImageRef(uri=uri, sha256=digest)


def validate_post(raw: dict, store: MediaStore, fetch: Optional[FetchFn] = None) -> Post:
    """Turn one external ingestion record into a validated Post.

    Record shape: {"id", "text", "created_at", "author": {"name",
    "screen_name", "description"}, "images": [{"uri"}]}; unknown fields are
    ignored.  Raises MalformedPost on missing id/text/timestamp and
    UnreadableImage when a locator cannot be fetched or decoded.
    """
    if not isinstance(raw, dict):
        raise MalformedPost("ingestion record must be a JSON object")
    post_id = raw.get("id")
    if not post_id or not isinstance(post_id, str):
        raise MalformedPost("record has no id")
    text = raw.get("text")
    if text is None or not isinstance(text, str):
        raise MalformedPost(f"record {post_id} has no text")
    created_raw = raw.get("created_at")
    if not created_raw:
        raise MalformedPost(f"record {post_id} has no created_at")
    try:
        created_at = parse_timestamp(created_raw)
    except ValueError as exc:
        raise MalformedPost(f"record {post_id}: bad created_at {created_raw!r}") from exc

    author = raw.get("author") or {}
    images = []
    for entry in raw.get("images", []) or []:
        uri = entry.get("uri") if isinstance(entry, dict) else None
        if not uri:
            raise MalformedPost(f"record {post_id} has an image without a uri")
        images.append(load_image(uri, store, fetch))

    return Post(
        id=post_id,
        text=text,
        created_at=created_at,
        author_name=author.get("name", ""),
        author_screen_name=author.get("screen_name", ""),
        author_description=author.get("description", ""),
        images=tuple(images),
    )


def load_post_file(path: str | Path, store: MediaStore, fetch: Optional[FetchFn] = None) -> Post:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return validate_post(raw, store, fetch)
