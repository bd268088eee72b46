"""Main-content extraction from raw HTML, stdlib only.

Scoring is deliberately simple: prefer an <article> element, otherwise take
the block container with the highest paragraph text density.  Boilerplate
tags (nav, header, footer, aside, script, style, form) never contribute.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from html import unescape
from html.parser import HTMLParser
from typing import Optional

from .models import parse_timestamp
from .providers.base import ExtractionEmpty, PageContent

_SKIP_TAGS = {"script", "style", "nav", "header", "footer", "aside", "form", "noscript", "svg"}
_BLOCK_TAGS = {"article", "main", "div", "section", "body"}
_VOID_TAGS = {"br", "hr", "img", "meta", "link", "input", "area", "base", "col", "embed",
              "source", "track", "wbr"}


@dataclass
class _Node:
    tag: str
    parent: Optional["_Node"]
    attrs: dict[str, str]
    paragraphs: list[str] = field(default_factory=list)
    children: list["_Node"] = field(default_factory=list)

    def all_paragraphs(self) -> list[str]:
        out = list(self.paragraphs)
        for child in self.children:
            out.extend(child.all_paragraphs())
        return out


class _Extractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = _Node("body", None, {})
        self._stack: list[_Node] = [self.root]
        self._skip_depth = 0
        self._text_parts: list[str] = []
        self._collecting: Optional[str] = None  # "p" | "title" | heading
        self.title = ""
        self.og_title = ""
        self.og_image = ""
        self.meta_published = ""
        self.time_datetime = ""
        self.jsonld_published = ""
        self._in_jsonld = False
        self._jsonld_parts: list[str] = []

    # -- tree ----------------------------------------------------------------

    def handle_starttag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        attr_map = {k: (v or "") for k, v in attrs}
        if tag == "meta":
            self._handle_meta(attr_map)
            return
        if tag in _VOID_TAGS:
            return
        if tag in _SKIP_TAGS:
            if tag == "script" and attr_map.get("type") == "application/ld+json":
                self._in_jsonld = True
                self._jsonld_parts = []
            self._skip_depth += 1
            return
        if self._skip_depth:
            return
        if tag == "time" and not self.time_datetime:
            self.time_datetime = attr_map.get("datetime", "")
        if tag in _BLOCK_TAGS:
            node = _Node(tag, self._stack[-1], attr_map)
            self._stack[-1].children.append(node)
            self._stack.append(node)
        elif tag == "p" or tag in {"h1", "h2", "h3", "li", "blockquote"}:
            self._collecting = tag
            self._text_parts = []
        elif tag == "title":
            self._collecting = "title"
            self._text_parts = []

    def handle_endtag(self, tag: str) -> None:
        if tag in _SKIP_TAGS:
            if self._skip_depth:
                self._skip_depth -= 1
            if tag == "script" and self._in_jsonld:
                self._in_jsonld = False
                self._read_jsonld("".join(self._jsonld_parts))
            return
        if self._skip_depth:
            return
        if tag in _BLOCK_TAGS:
            # Close up to the matching open block, tolerating bad nesting.
            for i in range(len(self._stack) - 1, 0, -1):
                if self._stack[i].tag == tag:
                    del self._stack[i:]
                    break
        elif self._collecting and (tag == self._collecting or tag == "p"):
            text = _collapse("".join(self._text_parts))
            if self._collecting == "title":
                self.title = self.title or text
            elif text:
                self._stack[-1].paragraphs.append(text)
            self._collecting = None

    def handle_data(self, data: str) -> None:
        if self._in_jsonld:
            self._jsonld_parts.append(data)
            return
        if self._skip_depth:
            return
        if self._collecting:
            self._text_parts.append(data)
        else:
            # Loose text directly inside a block container still counts.
            text = _collapse(data)
            if text and len(text) > 40:
                self._stack[-1].paragraphs.append(text)

    # -- metadata ------------------------------------------------------------

    def _handle_meta(self, attrs: dict[str, str]) -> None:
        key = attrs.get("property") or attrs.get("name") or ""
        content = attrs.get("content", "")
        if not content:
            return
        if key == "og:title" and not self.og_title:
            self.og_title = content
        elif key == "og:image" and not self.og_image:
            self.og_image = content
        elif key in {"article:published_time", "date", "dc.date", "publish-date",
                     "parsely-pub-date"} and not self.meta_published:
            self.meta_published = content

    def _read_jsonld(self, raw: str) -> None:
        if self.jsonld_published:
            return
        try:
            data = json.loads(raw)
        except ValueError:
            return
        items = data if isinstance(data, list) else [data]
        for item in items:
            if isinstance(item, dict):
                value = item.get("datePublished")
                if isinstance(value, str) and value:
                    self.jsonld_published = value
                    return


_WS_RE = re.compile(r"\s+")


def _collapse(text: str) -> str:
    return _WS_RE.sub(" ", unescape(text)).strip()


def _best_block(root: _Node) -> list[str]:
    articles: list[_Node] = []

    def walk(node: _Node) -> None:
        if node.tag == "article":
            articles.append(node)
        for child in node.children:
            walk(child)

    walk(root)
    if articles:
        best = max(articles, key=lambda n: sum(len(p) for p in n.all_paragraphs()))
        return best.all_paragraphs()

    # Density fallback: the container whose direct+descendant paragraphs
    # carry the most text, preferring deeper (tighter) containers on ties.
    best_node = root
    best_score = -1

    def score(node: _Node, depth: int) -> None:
        nonlocal best_node, best_score
        total = sum(len(p) for p in node.all_paragraphs())
        own = sum(len(p) for p in node.paragraphs)
        value = own * 2 + total + depth
        if total > 0 and value > best_score:
            best_score = value
            best_node = node
        for child in node.children:
            score(child, depth + 1)

    score(root, 0)
    return best_node.all_paragraphs()


def extract_page(html: str, url: str = "") -> PageContent:
    """Parse one HTML document into PageContent.

    Raises ExtractionEmpty when no main text survives the boilerplate
    filter.
    """
    parser = _Extractor()
    parser.feed(html)
    parser.close()

    paragraphs = _best_block(parser.root)
    main_text = "\n\n".join(paragraphs).strip()
    if not main_text:
        raise ExtractionEmpty(f"no main content found at {url or '<html>'}")

    title = parser.og_title or parser.title
    published = None
    for raw in (parser.meta_published, parser.time_datetime, parser.jsonld_published):
        if not raw:
            continue
        try:
            published = parse_timestamp(raw)
            break
        except ValueError:
            continue

    return PageContent(
        title=title,
        main_text=main_text,
        main_image=None,  # the caller decides whether to fetch og:image
        published_at=published,
    )


def extract_og_image_url(html: str) -> str:
    """Just the og:image URL, or empty string."""
    parser = _Extractor()
    parser.feed(html)
    parser.close()
    return parser.og_image
