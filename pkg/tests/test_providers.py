"""Gateway behavior: retries, memoization, accounting, scope filtering, and
the record/replay cassette layer."""

import base64
import threading

import pytest

from factweave.ingest import MediaStore
from factweave.models import Diagnostics, ImageRef, Query
from factweave.providers.base import (
    ContextOverflow,
    CostTable,
    ExtractionEmpty,
    FetchFailed,
    ProviderKind,
    ProviderSettings,
    ProviderUnavailable,
    QuotaExceeded,
    RetryPolicy,
    error_to_payload,
    maybe_raise_payload_error,
)
from factweave.providers.cassette import (
    Cassette,
    RecordingBackend,
    ReplayBackend,
    recording_backends,
    replay_backends,
    request_digest,
)
from factweave.providers.gateway import (
    REVERSE_IMAGE_PAGE_SIZE,
    ProviderGateway,
    host_in_scope,
)
from factweave.providers.mock import (
    CountingBackend,
    DictEmbedder,
    FlakyChat,
    ScriptedChat,
    ScriptedExtractor,
    ScriptedSearch,
)


def chat_gateway(backend, **kwargs):
    kwargs.setdefault("sleep", lambda s: None)
    kwargs.setdefault("jitter_source", lambda: 0.0)
    return ProviderGateway({ProviderKind.CHAT_LLM: backend}, **kwargs)


class TestRetry:
    def test_transient_failures_retried(self):
        inner = ScriptedChat(default="ok")
        flaky = FlakyChat(inner, failures=2)
        gw = chat_gateway(flaky)
        assert gw.chat("hello") == "ok"
        assert flaky.seen == 2

    def test_retries_exhausted(self):
        flaky = FlakyChat(ScriptedChat(default="ok"), failures=99)
        gw = chat_gateway(flaky)
        with pytest.raises(ProviderUnavailable):
            gw.chat("hello")
        assert flaky.seen == RetryPolicy().attempts

    def test_non_retryable_unavailable_fails_fast(self):
        class Refuse:
            calls = 0

            def invoke(self, request):
                Refuse.calls += 1
                raise ProviderUnavailable("no cassette entry", retryable=False)

        gw = chat_gateway(Refuse())
        with pytest.raises(ProviderUnavailable):
            gw.chat("hello")
        assert Refuse.calls == 1

    def test_deterministic_error_not_retried_and_not_recorded(self):
        class Quota:
            calls = 0

            def invoke(self, request):
                Quota.calls += 1
                raise QuotaExceeded("budget spent")

        slept = []
        gw = chat_gateway(Quota(), sleep=slept.append)
        with pytest.raises(QuotaExceeded):
            gw.chat("hello")
        assert Quota.calls == 1
        assert slept == []
        assert gw.diagnostics.calls == []

    def test_failed_calls_leave_no_record(self):
        gw = chat_gateway(FlakyChat(ScriptedChat(default="ok"), failures=99))
        with pytest.raises(ProviderUnavailable):
            gw.chat("hello")
        assert gw.diagnostics.calls == []

    def test_delay_schedule_backs_off(self):
        policy = RetryPolicy(attempts=4, base_delay=0.2, max_delay=5.0, jitter=0.0)
        delays = [policy.delay_for(i, 0.0) for i in range(3)]
        assert delays == sorted(delays)
        assert delays[0] == pytest.approx(0.2)

    def test_delay_capped(self):
        policy = RetryPolicy(attempts=10, base_delay=1.0, max_delay=2.5, jitter=0.0)
        assert policy.delay_for(8, 0.0) == pytest.approx(2.5)


class TestMemoization:
    def test_identical_request_hits_cache(self):
        backend = CountingBackend(ScriptedChat(default="ok"))
        gw = chat_gateway(backend)
        assert gw.chat("q") == "ok"
        assert gw.chat("q") == "ok"
        assert backend.calls == 1
        assert gw.diagnostics.cache_hits == 1
        assert len(gw.diagnostics.calls) == 1

    def test_different_context_misses(self):
        backend = CountingBackend(ScriptedChat(default="ok"))
        gw = chat_gateway(backend)
        gw.chat("q", context="a")
        gw.chat("q", context="b")
        assert backend.calls == 2

    def test_memoize_off(self):
        backend = CountingBackend(ScriptedChat(default="ok"))
        gw = chat_gateway(backend, memoize=False)
        gw.chat("q")
        gw.chat("q")
        assert backend.calls == 2

    def test_for_run_resets_memo_but_shares_backends(self):
        backend = CountingBackend(ScriptedChat(default="ok"))
        gw = chat_gateway(backend)
        gw.chat("q")
        run2 = gw.for_run(Diagnostics())
        run2.chat("q")
        assert backend.calls == 2
        assert run2.diagnostics.cache_hits == 0


class TestAccounting:
    def test_cost_and_tokens(self):
        class Priced:
            def invoke(self, request):
                return {"text": "ok", "_usage": {"prompt_tokens": 1000, "completion_tokens": 500}}

        settings = {
            ProviderKind.CHAT_LLM: ProviderSettings(
                cost=CostTable(per_call=0.01, per_1k_prompt_tokens=0.3, per_1k_completion_tokens=0.6)
            )
        }
        gw = chat_gateway(Priced(), settings=settings)
        gw.chat("q")
        rec = gw.diagnostics.calls[0]
        assert rec.cost == pytest.approx(0.01 + 0.3 + 0.3)
        assert rec.prompt_tokens == 1000
        assert rec.completion_tokens == 500
        assert gw.diagnostics.monetary_cost == pytest.approx(rec.cost)

    def test_speculative_commit_flow(self):
        gw = chat_gateway(ScriptedChat(default="ok"))
        gw.chat("spec-q", speculative=True)
        assert gw.diagnostics.provider_calls == {}
        assert gw.diagnostics.speculative_calls == 1
        gw.commit_call(ProviderKind.CHAT_LLM, gw.chat_request("spec-q"))
        assert gw.diagnostics.provider_calls == {"chat_llm": 1}
        assert gw.diagnostics.speculative_calls == 0

    def test_commit_ignores_unknown_request(self):
        gw = chat_gateway(ScriptedChat(default="ok"))
        gw.chat("a", speculative=True)
        gw.commit_call(ProviderKind.CHAT_LLM, gw.chat_request("never-sent"))
        assert gw.diagnostics.speculative_calls == 1


class TestPreconditions:
    def test_empty_prompt_rejected(self):
        gw = chat_gateway(ScriptedChat(default="ok"))
        with pytest.raises(ValueError):
            gw.chat("")

    def test_context_overflow_before_send(self):
        backend = CountingBackend(ScriptedChat(default="ok"))
        settings = {ProviderKind.CHAT_LLM: ProviderSettings(context_limit_chars=10)}
        gw = chat_gateway(backend, settings=settings)
        with pytest.raises(ContextOverflow):
            gw.chat("0123456789", context="x")
        assert backend.calls == 0

    def test_missing_backend(self):
        gw = ProviderGateway({})
        with pytest.raises(ProviderUnavailable) as err:
            gw.chat("q")
        assert not err.value.retryable

    def test_unknown_image_fails_fast(self):
        gw = ProviderGateway({ProviderKind.IMAGE_EMBEDDER: DictEmbedder({})})
        ref = ImageRef(uri="u", sha256="0" * 64)
        with pytest.raises(ValueError):
            gw.embed_image(ref)


class TestScope:
    def test_host_in_scope_subdomains(self):
        scope = frozenset({"example.org"})
        assert host_in_scope("https://example.org/a", scope)
        assert host_in_scope("https://news.example.org/a", scope)
        assert not host_in_scope("https://example.org.evil.test/a", scope)
        assert not host_in_scope("https://other.test/a", scope)

    def test_search_results_filtered(self):
        search = ScriptedSearch(
            {"q": ["https://in.example/a", "https://out.test/b", "https://sub.in.example/c"]}
        )
        gw = ProviderGateway({ProviderKind.TEXT_SEARCH: search})
        urls = gw.search_text(Query(text="q", origin_post="p"), frozenset({"in.example"}))
        assert urls == ["https://in.example/a", "https://sub.in.example/c"]

    def test_empty_scope_rejected(self):
        gw = ProviderGateway({ProviderKind.TEXT_SEARCH: ScriptedSearch({})})
        with pytest.raises(ValueError):
            gw.search_text(Query(text="q", origin_post="p"), frozenset())

    def test_unknown_query_returns_empty(self):
        gw = ProviderGateway({ProviderKind.TEXT_SEARCH: ScriptedSearch({})})
        assert gw.search_text(Query(text="q", origin_post="p"), frozenset({"x.example"})) == []


class TestReverseImage:
    def _gateway_with_hits(self, count):
        media = MediaStore()
        digest = media.put(b"img-bytes")
        ref = ImageRef(uri="u", sha256=digest)
        urls = [f"https://site.example/{i}" for i in range(count)]

        class Hits:
            def invoke(self, request):
                return {"urls": urls}

        gw = ProviderGateway({ProviderKind.REVERSE_IMAGE_SEARCH: Hits()}, media=media)
        return gw, ref

    def test_page_budget_caps_results(self):
        gw, ref = self._gateway_with_hits(120)
        urls = gw.search_reverse_image(ref, max_pages=5)
        assert len(urls) == 5 * REVERSE_IMAGE_PAGE_SIZE

    def test_fewer_hits_than_budget(self):
        gw, ref = self._gateway_with_hits(7)
        assert len(gw.search_reverse_image(ref, max_pages=5)) == 7

    def test_max_pages_validated(self):
        gw, ref = self._gateway_with_hits(1)
        with pytest.raises(ValueError):
            gw.search_reverse_image(ref, max_pages=0)


class TestExtractContent:
    def test_image_payload_lands_in_media_store(self):
        media = MediaStore()
        payload = {
            "title": "T",
            "main_text": "body",
            "published_at": "2023-04-01T00:00:00Z",
            "main_image_b64": base64.b64encode(b"pixels").decode("ascii"),
            "main_image_uri": "https://site.example/img.png",
        }
        gw = ProviderGateway(
            {ProviderKind.CONTENT_EXTRACTOR: ScriptedExtractor({"u": payload})}, media=media
        )
        page = gw.extract_content("u")
        assert page.main_image is not None
        assert media.get(page.main_image.sha256) == b"pixels"
        assert page.published_at is not None

    def test_extractor_error_modes(self):
        extractor = ScriptedExtractor({}, failing={"down"}, empty={"hollow"})
        gw = ProviderGateway({ProviderKind.CONTENT_EXTRACTOR: extractor})
        with pytest.raises(FetchFailed):
            gw.extract_content("down")
        with pytest.raises(ExtractionEmpty):
            gw.extract_content("hollow")
        with pytest.raises(FetchFailed):
            gw.extract_content("never-configured")


class TestConcurrencyBound:
    def test_semaphore_limits_in_flight(self):
        peak = 0
        active = 0
        lock = threading.Lock()
        gate = threading.Event()

        class Slow:
            def invoke(self, request):
                nonlocal peak, active
                with lock:
                    active += 1
                    peak = max(peak, active)
                gate.wait(0.2)
                with lock:
                    active -= 1
                return {"text": "ok"}

        settings = {ProviderKind.CHAT_LLM: ProviderSettings(max_in_flight=2)}
        gw = chat_gateway(Slow(), settings=settings, memoize=False)
        threads = [
            threading.Thread(target=lambda i=i: gw.chat(f"q{i}")) for i in range(6)
        ]
        for t in threads:
            t.start()
        gate.set()
        for t in threads:
            t.join()
        assert peak <= 2


class TestErrorPayloads:
    def test_roundtrip(self):
        payload = error_to_payload(FetchFailed("dns broke"))
        with pytest.raises(FetchFailed) as err:
            maybe_raise_payload_error(payload)
        assert "dns broke" in str(err.value)

    def test_plain_payload_passes(self):
        maybe_raise_payload_error({"text": "fine"})


class TestCassette:
    def _scripted(self):
        return {ProviderKind.CHAT_LLM: ScriptedChat(default="live answer")}

    def test_record_then_replay(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        cassette = Cassette(path)
        live = ProviderGateway(recording_backends(self._scripted(), cassette))
        assert live.chat("q1") == "live answer"

        replay = ProviderGateway(replay_backends(Cassette(path)))
        assert replay.chat("q1") == "live answer"

    def test_replay_miss_is_terminal(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        Cassette(path)  # empty tape
        replay = ProviderGateway(replay_backends(Cassette(path)))
        with pytest.raises(ProviderUnavailable) as err:
            replay.chat("never recorded")
        assert not err.value.retryable

    def test_deterministic_error_replayed(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        cassette = Cassette(path)
        extractor = ScriptedExtractor({}, failing={"down"})
        live = ProviderGateway(
            recording_backends({ProviderKind.CONTENT_EXTRACTOR: extractor}, cassette)
        )
        with pytest.raises(FetchFailed):
            live.extract_content("down")

        replay = ProviderGateway(replay_backends(Cassette(path)))
        with pytest.raises(FetchFailed):
            replay.extract_content("down")

    def test_transient_error_not_recorded(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        cassette = Cassette(path)
        flaky = FlakyChat(ScriptedChat(default="ok"), failures=99)
        live = ProviderGateway(
            recording_backends({ProviderKind.CHAT_LLM: flaky}, cassette),
            sleep=lambda s: None,
        )
        with pytest.raises(ProviderUnavailable):
            live.chat("q")
        assert len(Cassette(path)) == 0

    def test_write_through_and_dedupe(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        cassette = Cassette(path)
        backend = RecordingBackend(
            ProviderKind.CHAT_LLM, ScriptedChat(default="ok"), cassette
        )
        backend.invoke({"prompt": "q", "context": ""})
        backend.invoke({"prompt": "q", "context": ""})
        assert len(Cassette(path)) == 1

    def test_save_sorted_and_id_stable(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        requests = [{"prompt": f"q{i}", "context": ""} for i in range(4)]
        ca, cb = Cassette(), Cassette()
        for req in requests:
            ca.put(ProviderKind.CHAT_LLM, req, {"text": "r"})
        for req in reversed(requests):
            cb.put(ProviderKind.CHAT_LLM, req, {"text": "r"})
        ca.save(a)
        cb.save(b)
        assert a.read_text() == b.read_text()
        assert Cassette(a).cassette_id() == Cassette(b).cassette_id()

    def test_request_digest_canonical(self):
        d1 = request_digest(ProviderKind.CHAT_LLM, {"a": 1, "b": 2})
        d2 = request_digest(ProviderKind.CHAT_LLM, {"b": 2, "a": 1})
        assert d1 == d2
        assert d1 != request_digest(ProviderKind.TEXT_EMBEDDER, {"a": 1, "b": 2})

    def test_replay_backend_kind_isolated(self, tmp_path):
        cassette = Cassette()
        cassette.put(ProviderKind.CHAT_LLM, {"prompt": "q", "context": ""}, {"text": "r"})
        backend = ReplayBackend(ProviderKind.TEXT_EMBEDDER, cassette)
        with pytest.raises(ProviderUnavailable):
            backend.invoke({"prompt": "q", "context": ""})
