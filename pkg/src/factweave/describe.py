"""Turning post images into informative text.

Three independent signals per image (caption, recognized names, OCR text)
are fused by a single chat call carrying eight worked examples.  The fused
description is what every downstream prompt sees in place of the image.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .models import ImageRef, InformativeDescription, Post
from .prompts import CAPTION_PREFIX, fusion_prompt
from .providers.gateway import ProviderGateway


class FusionEmpty(RuntimeError):
    """The fusion call produced no usable description."""


def parse_description_reply(reply: str) -> str:
    """Normalize the fusion reply: the in-context examples wrap descriptions
    in braces and some models echo the trailing label."""
    text = reply.strip()
    if text.lower().startswith("image description:"):
        text = text[len("image description:"):].strip()
    if text.startswith("{") and text.endswith("}") and len(text) >= 2:
        text = text[1:-1].strip()
    return text


def describe_image(gateway: ProviderGateway, image: ImageRef) -> InformativeDescription:
    """Caption, recognize, OCR, then fuse.

    A blank fusion reply falls back to the raw caption; if the caption is
    also blank the strongest remaining signal stands in, keeping the
    description nonempty whenever any signal is.
    """
    caption = gateway.caption(image, prompt=CAPTION_PREFIX).strip()
    celebrities = tuple(gateway.recognize_celebrities(image))
    ocr_text = gateway.ocr(image).strip()

    if not caption and not celebrities and not ocr_text:
        return InformativeDescription(
            image=image, caption="", celebrities=(), ocr_text="", description=""
        )

    try:
        reply = gateway.chat(fusion_prompt(caption, celebrities, ocr_text))
        description = parse_description_reply(reply)
        if not description:
            raise FusionEmpty(f"blank fusion reply for image {image.sha256[:12]}")
    except FusionEmpty:
        gateway.diagnostics.notes.append(
            f"fusion returned blank for image {image.sha256[:12]}; using raw caption"
        )
        description = caption or ocr_text or ", ".join(celebrities)

    return InformativeDescription(
        image=image,
        caption=caption,
        celebrities=celebrities,
        ocr_text=ocr_text,
        description=description,
    )


def describe_all(
    gateway: ProviderGateway, post: Post, parallelism: int = 1
) -> list[InformativeDescription]:
    """Describe every post image, output ordered by image position."""
    if not post.images:
        return []
    if parallelism <= 1 or len(post.images) == 1:
        return [describe_image(gateway, image) for image in post.images]
    with ThreadPoolExecutor(max_workers=min(parallelism, len(post.images))) as pool:
        return list(pool.map(lambda image: describe_image(gateway, image), post.images))
