"""Final correction composition and its format validator.

The generation prompt states the format rules, but prompts are advisory;
an output-side validator enforces the opener, citation soundness, and the
no-numbered-URLs rule, retrying once with a corrective reminder before
rejecting.
"""

from __future__ import annotations

import re

from .models import CorrectionResponse, EvidenceItem, InformativeDescription, Post
from .prompts import RESPONSE_OPENER, RESPONSE_PROMPT, facts_block, tweet_context_full
from .providers.gateway import ProviderGateway
from .textclean import URL_RE


class FormatViolation(RuntimeError):
    """The generated text broke a mandatory format rule after one retry."""


OPENER_RETRY_SUFFIX = "\nReminder: your response must start with 'This tweet is'."

NO_EVIDENCE_OPENER = "No credible evidence was found"

NO_EVIDENCE_TEMPLATE = (
    "No credible evidence was found to verify this post at the time of this "
    "response. Before sharing or believing it, please pause and consider how "
    "accurate its claims are likely to be. The post's accuracy remains "
    "uncertain, and this response neither confirms nor refutes it."
)

_NUMBERED_PREFIX_RE = re.compile(r"\d+[.)]\s*$")


def find_urls(text: str) -> list[str]:
    return [m.group(0).rstrip(".,;:!?)") for m in URL_RE.finditer(text)]


def validate_response(text: str, evidence_urls: set[str]) -> tuple[list[str], list[str]]:
    """Returns (references in first-mention order, violation flags).

    References keep only URLs backed by evidence; uncited URLs and numbered
    citations are flagged.
    """
    flags: list[str] = []
    if not text.startswith(RESPONSE_OPENER):
        flags.append("missing_opener")

    references: list[str] = []
    for match in URL_RE.finditer(text):
        url = match.group(0).rstrip(".,;:!?)")
        prefix = text[max(0, match.start() - 8):match.start()]
        if _NUMBERED_PREFIX_RE.search(prefix):
            flags.append(f"numbered_url:{url}")
        if url not in evidence_urls:
            flags.append(f"uncited_url:{url}")
            continue
        if url not in references:
            references.append(url)
    return references, flags


def generate(
    gateway: ProviderGateway,
    post: Post,
    evidence: list[EvidenceItem],
    descriptions: list[InformativeDescription],
) -> CorrectionResponse:
    """Compose the evidence-path correction.

    The facts block preserves the order evidence arrived in (priority tier,
    then relevance), which the prompt tells the model to prioritize.
    """
    if not evidence:
        return generate_no_evidence(gateway, post)

    context = "\n".join([tweet_context_full(post, descriptions), "facts:", facts_block(evidence)])
    text = gateway.chat(RESPONSE_PROMPT, context=context)

    evidence_urls = {item.source_url for item in evidence}
    references, flags = validate_response(text, evidence_urls)

    if "missing_opener" in flags:
        text = gateway.chat(RESPONSE_PROMPT + OPENER_RETRY_SUFFIX, context=context)
        references, flags = validate_response(text, evidence_urls)
        if "missing_opener" in flags:
            gateway.diagnostics.validation_flags.append("missing_opener_after_retry")
            raise FormatViolation(
                f"response does not start with {RESPONSE_OPENER!r} after one retry"
            )

    gateway.diagnostics.validation_flags.extend(flags)
    return CorrectionResponse(
        text=text,
        references=tuple(references),
        evidence_trail=tuple(evidence),
        lack_of_evidence=False,
        diagnostics=gateway.diagnostics,
    )


def generate_no_evidence(gateway: ProviderGateway, post: Post) -> CorrectionResponse:
    """Fixed-template response for the lack-of-evidence path: states that no
    evidence exists yet, nudges the reader toward accuracy, and stays openly
    uncertain."""
    return CorrectionResponse(
        text=NO_EVIDENCE_TEMPLATE,
        references=(),
        evidence_trail=(),
        lack_of_evidence=True,
        diagnostics=gateway.diagnostics,
    )
