from __future__ import annotations

import pytest

from protest_pipeline.crawler import (
    CandidateLink,
    CrawlerError,
    FetchPolicy,
    Fetcher,
    NewsSource,
    VirtualClock,
    crawl_source,
    discover_links,
    normalize_url,
    parse_source_list,
    source_id_for_url,
    stem_match,
)

FAST_POLICY = FetchPolicy(per_host_delay=0.001, timeout=5.0)


class TestStemMatch:
    @pytest.mark.parametrize(
        "text,stem",
        [
            ("Teachers rally at Capitol", "rally"),
            ("Dow rallies 100 points", "rally"),
            ("Thousands marched downtown", "march"),
            ("Protesters gather at dawn", "protest"),
            ("Demonstrations planned statewide", "demonstration"),
            ("March for Our Lives", "march"),
        ],
    )
    def test_matches(self, text, stem):
        assert stem_match(text) == stem

    @pytest.mark.parametrize(
        "text",
        ["City council meeting tonight", "Five soup recipes", "", "martial arts class"],
    )
    def test_non_matches(self, text):
        assert stem_match(text) is None

    def test_first_stem_by_token_order(self):
        assert stem_match("protest and rally downtown") == "protest"
        assert stem_match("rally after the protest") == "rally"

    def test_case_insensitive(self):
        assert stem_match("PROTESTERS MARCH") == "protest"


class TestDiscoverLinks:
    def test_resolves_against_base(self):
        html = b'<a href="/news/1">Protest downtown</a>'
        links = discover_links(html, "https://ex.com")
        assert links == [
            CandidateLink(url="https://ex.com/news/1", anchor_text="Protest downtown", matched_stem="protest")
        ]

    def test_dedupes_same_url(self):
        html = (
            b'<a href="/news/1">Protest downtown</a>'
            b'<a href="/news/1#comments">Protest downtown again</a>'
        )
        links = discover_links(html, "https://EX.com")
        assert len(links) == 1
        assert links[0].url == "https://ex.com/news/1"

    def test_five_anchor_fixture(self):
        html = b"""
        <ul>
          <li><a href="/a">Protest at the plant</a></li>
          <li><a href="/b">School board agenda</a></li>
          <li><a href="/c">Weather warning issued</a></li>
          <li><a href="/d">Union rally planned</a></li>
          <li><a href="/e">Local bakery expands</a></li>
        </ul>
        """
        links = discover_links(html, "https://ex.com")
        assert [l.url for l in links] == ["https://ex.com/a", "https://ex.com/d"]
        assert [l.matched_stem for l in links] == ["protest", "rally"]

    def test_url_path_matching(self):
        html = b'<a href="/news/gun-control-march-draws-crowd">Local story</a>'
        links = discover_links(html, "https://ex.com")
        assert len(links) == 1
        assert links[0].matched_stem == "march"

    def test_garbage_input_yields_empty(self):
        assert discover_links(b"\x00\xff\xfe<<<>>>", "https://ex.com") == []

    def test_anchor_without_href_ignored(self):
        assert discover_links(b"<a>protest</a>", "https://ex.com") == []


class TestPolicyAndSources:
    def test_policy_validation(self):
        with pytest.raises(CrawlerError):
            FetchPolicy(per_host_delay=0)
        with pytest.raises(CrawlerError):
            FetchPolicy(max_pages_per_source=0)

    def test_source_scheme_validation(self):
        with pytest.raises(CrawlerError):
            NewsSource(id="s", url="ftp://ex.com")

    def test_parse_source_list(self, tmp_path):
        path = tmp_path / "sources.txt"
        path.write_text(
            "# local fixtures\n"
            "https://gazette.example\tExample Gazette\n"
            "\n"
            "https://tribune.example\n",
            encoding="utf-8",
        )
        sources = parse_source_list(path)
        assert len(sources) == 2
        assert sources[0].label == "Example Gazette"
        assert sources[1].label == ""
        assert sources[0].id == source_id_for_url("https://gazette.example")

    def test_normalize_url(self):
        assert normalize_url("HTTPS://Ex.Com/News/1#frag") == "https://ex.com/News/1"


class TestFixtureCrawl:
    def test_crawl_fixture_site(self, fixture_site_url):
        source = NewsSource(id="s1", url=fixture_site_url)
        fetcher = Fetcher(FAST_POLICY, clock=VirtualClock())
        result = crawl_source(source, FAST_POLICY, fetcher)
        assert result.source_error is None
        urls = [item.link.url for item in result.items]
        assert [u.rsplit("/", 1)[1] for u in urls] == [
            "syndicated.html",
            "fresh.html",
            "dow.html",
        ]
        for item in result.items:
            assert item.result is not None
            assert item.result.status == 200
            assert item.result.body

    def test_known_urls_marked_cached(self, fixture_site_url):
        source = NewsSource(id="s1", url=fixture_site_url)
        fetcher = Fetcher(FAST_POLICY, clock=VirtualClock())
        first = crawl_source(source, FAST_POLICY, fetcher)
        known = {item.link.url for item in first.items}
        second = crawl_source(source, FAST_POLICY, fetcher, known_urls=known)
        assert all(item.cached for item in second.items)
        assert all(item.result is None for item in second.items)

    def test_page_cap_enforced(self, fixture_site_url):
        policy = FetchPolicy(per_host_delay=0.001, timeout=5.0, max_pages_per_source=1)
        source = NewsSource(id="s1", url=fixture_site_url)
        fetcher = Fetcher(policy, clock=VirtualClock())
        result = crawl_source(source, policy, fetcher)
        fetched = [item for item in result.items if item.result is not None]
        assert len(fetched) == 1
        assert result.diagnostics

    def test_missing_source_page_is_source_error(self, tmp_path):
        url = (tmp_path / "nowhere").as_uri() + "/"
        source = NewsSource(id="s1", url=url)
        fetcher = Fetcher(FAST_POLICY, clock=VirtualClock())
        result = crawl_source(source, FAST_POLICY, fetcher)
        assert result.source_error is not None
        assert result.items == []

    def test_per_host_delay_honored(self, fixture_site_url):
        policy = FetchPolicy(per_host_delay=2.0, timeout=5.0)
        clock = VirtualClock()
        fetcher = Fetcher(policy, clock=clock)
        source = NewsSource(id="s1", url=fixture_site_url)
        result = crawl_source(source, policy, fetcher)
        stamps = [item.result.fetched_at for item in result.items if item.result]
        stamps.sort()
        for earlier, later in zip(stamps, stamps[1:]):
            assert later - earlier >= policy.per_host_delay - 1e-9

    def test_candidate_fetch_failures_do_not_abort(self, tmp_path):
        site = tmp_path / "site"
        site.mkdir()
        (site / "index.html").write_text(
            '<a href="gone.html">Protest story</a><a href="here.html">Rally story</a>',
            encoding="utf-8",
        )
        (site / "here.html").write_text("<p>rally content here</p>", encoding="utf-8")
        source = NewsSource(id="s1", url=site.as_uri() + "/")
        fetcher = Fetcher(FAST_POLICY, clock=VirtualClock())
        result = crawl_source(source, FAST_POLICY, fetcher)
        by_name = {item.link.url.rsplit("/", 1)[1]: item for item in result.items}
        assert by_name["gone.html"].result.status == 404
        assert by_name["here.html"].result.status == 200
