"""Core data model invariants and codecs."""

import json
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from factweave.models import (
    CorrectionResponse,
    Diagnostics,
    EvidenceItem,
    EvidenceKind,
    ImageRef,
    InformativeDescription,
    PipelineConfig,
    Post,
    Priority,
    ProviderCallRecord,
    Query,
    RetrievedPage,
    canonical_json,
    content_hash,
    format_timestamp,
    parse_timestamp,
)

UTC = timezone.utc


def make_post(**overrides):
    base = dict(
        id="p1",
        text="claim text",
        created_at=datetime(2023, 5, 1, 12, 0, tzinfo=UTC),
        author_name="A",
        author_screen_name="a",
        author_description="bio",
        images=(),
    )
    base.update(overrides)
    return Post(**base)


class TestTimestamps:
    def test_roundtrip(self):
        ts = datetime(2023, 5, 1, 12, 30, 15, tzinfo=UTC)
        assert parse_timestamp(format_timestamp(ts)) == ts

    def test_z_suffix_accepted(self):
        assert parse_timestamp("2023-05-01T12:00:00Z") == datetime(
            2023, 5, 1, 12, 0, tzinfo=UTC
        )

    def test_naive_coerced_to_utc(self):
        # Extractors hand back zone-less article dates; treat them as UTC.
        ts = parse_timestamp("2023-05-01T12:00:00")
        assert ts.tzinfo is not None
        assert ts == datetime(2023, 5, 1, 12, 0, tzinfo=UTC)

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_timestamp("yesterday")

    def test_offset_normalized_to_utc(self):
        ts = parse_timestamp("2023-05-01T14:00:00+02:00")
        assert ts == datetime(2023, 5, 1, 12, 0, tzinfo=UTC)


class TestCanonicalJson:
    def test_key_order_insensitive(self):
        assert canonical_json({"b": 1, "a": 2}) == canonical_json({"a": 2, "b": 1})

    def test_unicode_not_escaped(self):
        assert "é" in canonical_json({"k": "é"})

    def test_content_hash_stable(self):
        assert content_hash({"x": [1, 2]}) == content_hash({"x": [1, 2]})
        assert content_hash({"x": 1}) != content_hash({"x": 2})

    def test_parseable(self):
        payload = {"nested": {"list": [1, "two", None]}}
        assert json.loads(canonical_json(payload)) == payload


class TestPost:
    def test_codec_roundtrip(self):
        post = make_post(images=(ImageRef(uri="u", sha256="0" * 64),))
        assert Post.from_dict(post.to_dict()) == post

    def test_has_images(self):
        assert not make_post().has_images
        assert make_post(images=(ImageRef(uri="u", sha256="0" * 64),)).has_images

    def test_empty_id_rejected(self):
        with pytest.raises(ValueError):
            make_post(id="")


class TestInformativeDescription:
    def test_description_required_when_signal_present(self):
        image = ImageRef(uri="u", sha256="0" * 64)
        with pytest.raises(ValueError):
            InformativeDescription(
                image=image, caption="a cat", celebrities=(), ocr_text="", description=""
            )

    def test_all_blank_allows_empty_description(self):
        image = ImageRef(uri="u", sha256="0" * 64)
        d = InformativeDescription(
            image=image, caption="", celebrities=(), ocr_text="", description=""
        )
        assert d.description == ""


class TestPriority:
    def test_rank_order(self):
        assert (
            Priority.HIGH.rank
            > Priority.MEDIUM.rank
            > Priority.LOW.rank
            > Priority.EXCLUDED.rank
        )

    def test_values_stable(self):
        assert {p.value for p in Priority} == {"high", "medium", "low", "excluded"}


class TestEvidenceItem:
    def _item(self, quotes):
        return EvidenceItem(
            kind=EvidenceKind.EXPLICIT_REFUTATION,
            quotes=quotes,
            source_url="https://example.org/a",
            source_priority=Priority.HIGH,
            source_relevance=96.0,
            published_at=datetime(2023, 4, 1, tzinfo=UTC),
        )

    def test_quote_count_bounds(self):
        assert self._item(("q",)).quotes == ("q",)
        assert len(self._item(("q1", "q2")).quotes) == 2
        with pytest.raises(ValueError):
            self._item(())
        with pytest.raises(ValueError):
            self._item(("a", "b", "c"))

    def test_codec_roundtrip(self):
        item = self._item(("q1", "q2"))
        assert EvidenceItem.from_dict(item.to_dict()) == item


class TestDiagnostics:
    def _call(self, kind="chat_llm", speculative=False, cost=1.0):
        return ProviderCallRecord(
            kind=kind,
            request_digest="r" * 64,
            response_digest="s" * 64,
            latency=0.5,
            cost=cost,
            prompt_tokens=10,
            completion_tokens=5,
            speculative=speculative,
        )

    def test_speculative_excluded_from_committed_accounting(self):
        diag = Diagnostics()
        diag.record_call(self._call(cost=1.0))
        diag.record_call(self._call(speculative=True, cost=9.0))
        assert diag.provider_calls == {"chat_llm": 1}
        assert diag.monetary_cost == 1.0
        assert diag.speculative_calls == 1
        assert diag.speculative_cost == 9.0

    def test_stable_dict_excludes_clock_and_cache(self):
        diag = Diagnostics(wall_time=3.4, cache_hits=7)
        diag.notes.append("note")
        stable = diag.stable_dict()
        assert "wall_time" not in stable
        assert "cache_hits" not in stable
        assert "notes" not in stable

    def test_stable_dict_keeps_validation_flags(self):
        diag = Diagnostics()
        diag.validation_flags.append("missing_opener")
        assert diag.stable_dict()["validation_flags"] == ["missing_opener"]


class TestCorrectionResponse:
    def test_stable_json_deterministic(self):
        def build():
            diag = Diagnostics(cutoff=datetime(2023, 5, 1, tzinfo=UTC))
            diag.wall_time = 1.23  # differs per run; must not leak
            return CorrectionResponse(
                text="This tweet is false.",
                references=("https://example.org/a",),
                evidence_trail=(),
                lack_of_evidence=False,
                diagnostics=diag,
            )

        a, b = build(), build()
        object.__setattr__(b.diagnostics, "wall_time", 9.99)
        assert a.stable_json() == b.stable_json()

    def test_codec_roundtrip(self):
        resp = CorrectionResponse(
            text="This tweet is false.",
            references=(),
            evidence_trail=(),
            lack_of_evidence=True,
            diagnostics=Diagnostics(),
        )
        again = CorrectionResponse.from_dict(resp.to_dict())
        assert again.stable_json() == resp.stable_json()


class TestPipelineConfig:
    def test_defaults_snapshot(self):
        config = PipelineConfig()
        assert config.to_dict() == {
            "queries_text_only": 3,
            "queries_with_images": 5,
            "max_links_same_priority": 10,
            "reverse_image_max_pages": 5,
            "text_relevance_threshold": 90.0,
            "multimodal_text_threshold": 95.0,
            "visual_threshold": 0.7,
            "max_page_chars": 20000,
            "refutation_stop_count": 2,
            "parallelism": 5,
            "embedder_id": None,
        }

    def test_positive_validation(self):
        with pytest.raises(ValueError):
            PipelineConfig(refutation_stop_count=0)
        with pytest.raises(ValueError):
            PipelineConfig(visual_threshold=-0.1)

    def test_with_parallelism_changes_hash(self):
        base = PipelineConfig()
        assert base.with_parallelism(2).parallelism == 2
        assert base.with_parallelism(2).snapshot_hash() != base.snapshot_hash()

    def test_from_dict_ignores_unknown(self):
        config = PipelineConfig.from_dict({"parallelism": 2, "mystery": True})
        assert config.parallelism == 2


@given(
    st.dictionaries(
        st.text(min_size=1, max_size=8),
        st.one_of(st.integers(), st.text(max_size=12), st.booleans(), st.none()),
        max_size=6,
    )
)
def test_content_hash_is_a_function_of_value(payload):
    assert content_hash(payload) == content_hash(json.loads(json.dumps(payload)))


class TestRetrievedPageAndQuery:
    def test_retrieved_page_codec(self):
        page = RetrievedPage(
            url="https://example.org/x",
            publisher_domain="example.org",
            title="t",
            main_text="body",
            main_image=None,
            published_at=datetime(2023, 4, 1, tzinfo=UTC),
            text_relevance=95.5,
            visual_relevance=None,
            priority=Priority.MEDIUM,
        )
        assert RetrievedPage.from_dict(page.to_dict()) == page

    def test_query_requires_text(self):
        with pytest.raises(ValueError):
            Query(text="", origin_post="p1")
