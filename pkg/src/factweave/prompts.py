"""Prompt templates and context composers.

The template strings are program data with exact wording the pipeline's
behavior contracts depend on (downstream parsing keys off phrases like the
"none" escape hatch), so they must not be reflowed or paraphrased.  Slots
use bracketed tokens filled by ``.replace`` because the templates themselves
are full of literal braces.
"""

from __future__ import annotations

from typing import Optional

from .models import EvidenceItem, InformativeDescription, Post, format_timestamp

QUERY_PROMPT_TEMPLATE = (
    "Given a tweet, you are required to generate [N] different queries from the tweet "
    "for the Google search engine to get the most relevant web content to fact-check "
    'the tweet. If the given tweet is not informative enough to generate a query, you '
    'should answer "none".'
)

EXTRACTION_PROMPT = (
    "Given an article: 1. Quote its paragraphs, at most two, that explicitly and "
    "completely refute the given tweet. 2. Quote its paragraphs, at most two, that "
    "implicitly refute the given tweet. Such paragraphs often provide the tweet's "
    "context that can imply the tweet is cherry-picking by showing the full picture. "
    "If the article does not have such content or is irrelevant to the tweet, you "
    "should answer 'none.'"
)

RESPONSE_PROMPT = (
    "You are required to respond to a tweet, given some facts as references. Your "
    "response should satisfy all the following requirements:\n"
    "- Your response should explain where and why the tweet is or is not misinformed "
    "or potentially misleading.\n"
    "- You should prioritize the facts very close to the date the user tweeted, very "
    "recently, and listed at the beginning of the facts.\n"
    "- You should show the URLs that support your explanation. You should not number "
    "the URLs.\n"
    "- Your response should be informative and short.\n"
    "- Your response should start with 'This tweet is.'"
)

RESPONSE_OPENER = "This tweet is"

# One description template plus eight worked examples; the final three slots
# take the current image's caption, recognized names, and OCR text.
FUSION_PROMPT_TEMPLATE = """Describe an image in an informative way. Your description should be only based on the given {short caption}, {name of each person}, and {raw text}. If the image is from social media, you should start with "A screenshot of". If the image is a quote from someone, you should start with "A quote from" followed by this person's name if there is any, then by the quoted text. If the image is an article, you should start with "An article". If the image is a photo, you should start with "A photo of". If the image is a map, you should start with "A map of". {raw text} may contain nonsense data that are unnecessarily included in the image description; however, {name of each person} is not, and if the concept in {raw text} has a conflict with that in {short caption} (e.g., "Robbie Lemos" versus "robbie leems" shown later), {raw text} is often the right one.
short caption: {a woman with glasses and a quote that says, in real life, i assure you there is no such thing as algebra}
name of each person: {Fran Lebowitz}
raw text: {"In real life, I assure you, there is no such thing as algebra."}
image description: {A quote from Fran Lebowitz, "In real life, I assure you, there is no such thing as algebra."}
short caption: {two men in suits}
name of each person: {Jim Caviezel, Michael Emerson}
raw text: {}
image description: {A photo of Jim Caviezel and Michael Emerson in suits}
short caption: {robbie leems on twitter}
name of each person: {}
raw text: {Robbie Lemos @RobbieLemos 1d I'd like to congratulate my dear friend Deep Mind on a wonderful 1st day at work today at Google. Just in time for #EarthDay2023, cheers brother! 1 2 3,790}
image description: {A screenshot of a post of Robbie Lemos, "I'd like to congratulate my dear friend Deep Mind on a wonderful 1st day at work today at Google. Just in time for #EarthDay2023, cheers brother!" The post was posted on Twitter.}
short caption: {a moose}
name of each person: {}
raw text: {Yahoo Finance @YahooFinance Typically, the stock market bottoms four to five months before a recession ends, but RBC's research details that it has bottomed as early as nine months before the end of a recession. finance.yahoo.com Could the stock market power through a recession? 'This would be rare.' 09:57 22/4/2023 3.4,011 Views 1 Retweet 1 Quote 5 Likes 1 Bookmark}
image description: {A screenshot of a post from Yahoo Finance, "Typically, the stock market bottoms four to five months before a recession ends, but RBC's research details that it has bottomed as early as nine months before the end of a recession." The post shared an article from finance.yahoo.com claiming, "Could the stock market power through a recession? 'This would be rare.'" with a picture of a moose. The post was posted at 09:57 22/4/2023.}
short caption: {a person pouring tea into a cup}
name of each person: {}
raw text: {New research reveals how coffee and tea can affect risk of early death for adults with diabetes By Sandee LaMotte, CNN Updated 7:01 PM EDT, Wed April 19, 2023 f The health benefits of tea 01:10 - Source: CNN}
image description: {An article claiming, "New research reveals how coffee and tea can affect risk of early death for adults with diabetes." It attached a picture of a person pouring tea into a cup. It was written by Sandee LaMotte, published by CNN, and updated at 7:01 PM EDT, Wed April 19, 2023.}
short caption: {two people standing next to each other with the words love is blind}
name of each person: {Nick Lachey}
raw text: {\\"Love Is Blind\\" co-host faceplants with a regressive line of questioning Hayley Miller MSNBC DAILY MSNBC}
image description: {An article claiming, "'Love Is Blind' co-host faceplants with a regressive line of questioning." It attached a picture of Nick Lachey and another person standing next to each other. It was written by Hayley Miller and published by MSNBC.}
short caption: {a bar graph that shows how engaged are the most followed journalists on twitter}
name of each person: {Rahul Kanwal}
raw text: {How engaged are the most-followed journalists on Twitter? Percentage of tweets from each journalist that are at-replies BDUTT 64%}
image description: {A bar graph showing how engaged the most followed journalists, including Rahul Kanwal, are on Twitter through the percentage of tweets from each journalist that are at-replies. The chart was made by mattmaldre.com.}
short caption: {a graph showing the global defense budget by region}
name of each person: {}
raw text: {Global Defense Budgets by Region ($ Billions) $1,000 800 600 400 200 0 2020 2021 2022 2023 2024 2025 Asia-Pacific Latin America North America Sub-Saharan Africa Europe Middle East & North Africa Russia & Commonwealth of Independent States Source: Aviation Week}
image description: {A graph showing the global defense budget by region. It is from Aviation Week.}
short caption: {[IMAGE_CAPTION]}
name of each person: {[CELEBRITIES]}
raw text: {[OCR]}
image description:"""

DESCRIPTION_OPENERS = (
    "A screenshot of",
    "A quote from",
    "An article",
    "A photo of",
    "A map of",
)

CAPTION_PREFIX = "A photo of"

# The formatting of these context blocks is part of the replay contract:
# cassette digests hash the full prompt, so changing a label or separator
# invalidates every recorded fixture.


def query_prompt(n: int) -> str:
    return QUERY_PROMPT_TEMPLATE.replace("[N]", str(n))


def fusion_prompt(caption: str, celebrities: tuple[str, ...], ocr_text: str) -> str:
    return (
        FUSION_PROMPT_TEMPLATE.replace("[IMAGE_CAPTION]", caption)
        .replace("[CELEBRITIES]", ", ".join(celebrities))
        .replace("[OCR]", ocr_text)
    )


def _descriptions_block(descriptions: list[InformativeDescription]) -> str:
    return "\n".join(d.description for d in descriptions if d.description)


def tweet_context_for_query(post: Post, descriptions: list[InformativeDescription]) -> str:
    """Post context for query generation: text, image descriptions, time,
    and the poster's name."""
    parts = [f"tweet text: {post.text}"]
    block = _descriptions_block(descriptions)
    if block:
        parts.append(f"image descriptions: {block}")
    parts.append(f"tweet time: {format_timestamp(post.created_at)}")
    parts.append(f"poster's name: {post.author_name}")
    return "\n".join(parts)


def tweet_context_full(post: Post, descriptions: list[InformativeDescription]) -> str:
    """Post context for evidence extraction and response generation: adds the
    poster's screen name and profile description."""
    parts = [f"tweet text: {post.text}"]
    block = _descriptions_block(descriptions)
    if block:
        parts.append(f"image captions: {block}")
    parts.append(f"tweet time: {format_timestamp(post.created_at)}")
    parts.append(f"poster's name: {post.author_name}")
    parts.append(f"poster's screen name: {post.author_screen_name}")
    parts.append(f"poster's description: {post.author_description}")
    return "\n".join(parts)


def article_context(main_text: str, published_at: Optional[object]) -> str:
    published = format_timestamp(published_at) if published_at else "unknown"
    return f"article content: {main_text}\narticle published date: {published}"


def facts_block(evidence: list[EvidenceItem]) -> str:
    """The references fed to response generation: each piece of evidence with
    its source link and published date, already in evidence order."""
    lines = []
    for item in evidence:
        published = format_timestamp(item.published_at) if item.published_at else "unknown"
        for quote in item.quotes:
            lines.append(f"- {quote} (source: {item.source_url}, published: {published})")
    return "\n".join(lines)
