#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "linkmine/crawl.hpp"
#include "linkmine/html.hpp"
#include "support/fixture_site.hpp"
#include "support/temp_dir.hpp"

using namespace linkmine;
using testing::build_fixture_site;

namespace {

std::optional<std::string> field(const RawProfile& raw, const std::string& name) {
    if (name == "positions_overview") return raw.positions_overview;
    if (name == "summary_description") return raw.summary_description;
    if (name == "education_degree1") return raw.education_degree1;
    if (name == "education_degree2") return raw.education_degree2;
    if (name == "education_degree3") return raw.education_degree3;
    FAIL("unknown field: ", name);
    return std::nullopt;
}

CrawlConfig fixture_config(const testing::FixtureSite& site) {
    CrawlConfig cfg;
    cfg.seed_url = site.seed_url;
    cfg.politeness_delay = std::chrono::milliseconds(0);
    cfg.selector_rules =
        load_selector_rules(std::string(LINKMINE_DATA_DIR) + "/selectors_default.json");
    cfg.leaf_pattern = {LeafRule::Kind::UrlRegex, "/pub/profile-[0-9]+$"};
    return cfg;
}

}  // namespace

TEST_CASE("canonicalize_url normal forms") {
    CHECK(canonicalize_url("HTTP://Example.COM/Path") ==
          "http://example.com/Path");
    CHECK(canonicalize_url("http://example.com") == "http://example.com/");
    CHECK(canonicalize_url("http://example.com:80/x") == "http://example.com/x");
    CHECK(canonicalize_url("https://example.com:443/x") ==
          "https://example.com/x");
    CHECK(canonicalize_url("http://example.com:8080/x") ==
          "http://example.com:8080/x");
    CHECK(canonicalize_url("http://example.com/a#frag") ==
          "http://example.com/a");
    CHECK(canonicalize_url("http://example.com/a/./b/../c") ==
          "http://example.com/a/c");
    CHECK(canonicalize_url("http://example.com/a?b=1#frag") ==
          "http://example.com/a?b=1");

    CHECK_THROWS_AS(canonicalize_url("not a url"), ParseError);
    CHECK_THROWS_AS(canonicalize_url("/relative/only"), ParseError);
    CHECK_THROWS_AS(canonicalize_url(""), ParseError);
}

TEST_CASE("resolve_url handles every href shape") {
    const std::string base = "http://host.test/dir/page";
    CHECK(resolve_url(base, "http://other.test/x") == "http://other.test/x");
    CHECK(resolve_url(base, "//cdn.test/y") == "http://cdn.test/y");
    CHECK(resolve_url(base, "/rooted") == "http://host.test/rooted");
    CHECK(resolve_url(base, "sibling") == "http://host.test/dir/sibling");
    CHECK(resolve_url(base, "sub/deeper") == "http://host.test/dir/sub/deeper");
    CHECK(resolve_url(base, "../up") == "http://host.test/up");
    CHECK(resolve_url(base, "?q=1") == "http://host.test/dir/page?q=1");

    // Fragment-only links lead nowhere new.
    CHECK_FALSE(resolve_url(base, "#frag").has_value());
    CHECK_FALSE(resolve_url(base, "mailto:someone@host.test").has_value());
    CHECK_FALSE(resolve_url(base, "javascript:void(0)").has_value());
    CHECK_FALSE(resolve_url(base, "ftp://host.test/file").has_value());
}

TEST_CASE("url host/path accessors") {
    CHECK(url_host("http://host.test:8080/a/b") == "host.test:8080");
    CHECK(url_host("http://host.test/a/b") == "host.test");
    CHECK(url_path("http://host.test/a/b?q=1") == "/a/b");
    CHECK(url_path("http://host.test/") == "/");
}

TEST_CASE("fixture fetcher path mapping") {
    CHECK(FixtureFetcher::url_to_relpath("http://h.test/") == "index.html");
    CHECK(FixtureFetcher::url_to_relpath("http://h.test/dir/region-0") ==
          "dir/region-0.html");
    CHECK(FixtureFetcher::url_to_relpath("http://h.test/styles/site.css") ==
          "styles/site.css");
}

TEST_CASE("fixture fetcher serves files and reports misses") {
    testing::ScopedTempDir dir("fetch");
    write_file(dir.file("index.html"), "<html><body>root</body></html>");
    FixtureFetcher fetcher(dir.path());

    const auto page = fetcher.fetch("http://any.test/");
    REQUIRE(page.has_value());
    CHECK(page->url == "http://any.test/");
    CHECK(page->body.find("root") != std::string::npos);

    CHECK_FALSE(fetcher.fetch("http://any.test/absent").has_value());
}

TEST_CASE("frontier deduplicates and tracks visited") {
    Frontier f;
    Rng rng(1);
    CHECK(f.enqueue("http://h.test/a"));
    CHECK_FALSE(f.enqueue("http://h.test/a"));  // already queued
    CHECK(f.enqueue("http://h.test/b"));
    CHECK(f.queue_size() == 2);

    const std::string first = f.select_next(0.0, rng);
    CHECK(first == "http://h.test/a");  // FIFO at randomness 0
    CHECK(f.visited("http://h.test/a"));
    CHECK_FALSE(f.enqueue("http://h.test/a"));  // now visited
    CHECK(f.select_next(0.0, rng) == "http://h.test/b");
    CHECK(f.queue_empty());
    CHECK(f.visited_count() == 2);
    CHECK_THROWS_AS(f.select_next(0.0, rng), std::logic_error);
}

TEST_CASE("frontier randomness picks beyond the head") {
    // With randomness 1 the pick is uniform; across seeds both elements
    // must show up as the first pick.
    std::set<std::string> first_picks;
    for (std::uint64_t seed = 0; seed < 32; ++seed) {
        Frontier f;
        Rng rng(seed);
        f.enqueue("http://h.test/a");
        f.enqueue("http://h.test/b");
        f.enqueue("http://h.test/c");
        first_picks.insert(f.select_next(1.0, rng));
    }
    CHECK(first_picks.size() == 3);

    // Same seed, same sequence.
    auto draw_all = [](std::uint64_t seed) {
        Frontier f;
        Rng rng(seed);
        for (char c = 'a'; c <= 'f'; ++c) {
            f.enqueue(std::string("http://h.test/") + c);
        }
        std::vector<std::string> order;
        while (!f.queue_empty()) order.push_back(f.select_next(0.8, rng));
        return order;
    };
    CHECK(draw_all(9) == draw_all(9));
}

TEST_CASE("classify_page by url and by content") {
    Page leaf{"http://h.test/pub/profile-007", "<html>x</html>"};
    Page dir{"http://h.test/dir/region-1", "<html>x</html>"};
    const LeafRule by_url{LeafRule::Kind::UrlRegex, "/pub/profile-[0-9]+$"};
    CHECK(classify_page(leaf, by_url) == PageKind::Leaf);
    CHECK(classify_page(dir, by_url) == PageKind::DirectoryLevel);

    const LeafRule by_content{LeafRule::Kind::ContentRegex,
                              "class=\"member-name\""};
    Page person{"http://h.test/x", "<div class=\"member-name\">A</div>"};
    CHECK(classify_page(person, by_content) == PageKind::Leaf);
    CHECK(classify_page(dir, by_content) == PageKind::DirectoryLevel);
}

TEST_CASE("html helpers") {
    const std::string doc =
        "<html><head><script>var x = '<b>no</b>';</script>"
        "<style>.a { color: red }</style></head>"
        "<body><p>Hello &amp; <b>world</b>!</p>"
        "<a href=\"/one\">1</a> <a href='two.html'>2</a>"
        "<a name=\"no-href\">skip</a></body></html>";

    // Tags become separators, so "world</b>!" reads "world !".
    CHECK(html::inner_text(doc) == "Hello & world ! 1 2 skip");
    CHECK(html::extract_links(doc) == std::vector<std::string>{"/one", "two.html"});
    CHECK(html::decode_entities("a &lt;b&gt; &quot;c&quot; &#65;&#x42;") ==
          "a <b> \"c\" AB");

    const auto el = html::find_by_class(doc, "", "a");
    CHECK_FALSE(el.has_value());  // style rules are not elements

    const std::string nested =
        "<div class=\"outer note\" id=\"n1\" data-kind=\"x\">"
        "  line one\n  line   two </div>";
    const auto by_class = html::find_by_class(nested, "div", "note");
    REQUIRE(by_class.has_value());
    CHECK(by_class->attr("id") == "n1");
    CHECK(by_class->attr("data-kind") == "x");
    CHECK_FALSE(by_class->attr("missing").has_value());
    CHECK(html::inner_text(by_class->inner_html) == "line one line two");

    const auto by_attr = html::find_by_attr(nested, "div", "id", "n1");
    REQUIRE(by_attr.has_value());
    CHECK(by_attr->tag == "div");
    CHECK_FALSE(html::find_by_attr(nested, "div", "id", "n2").has_value());
    CHECK_FALSE(html::find_by_class(nested, "span", "note").has_value());
}

TEST_CASE("extract_fields applies css, xpath-like and regex rules") {
    SelectorRules rules;
    rules["positions_overview"] = {PatternKind::Css, ".positions"};
    rules["summary_description"] = {PatternKind::Css, "#summary"};
    rules["education_degree1"] = {PatternKind::Css, ".degree-1"};
    rules["education_degree2"] = {PatternKind::XPathLike,
                                  "//div[@data-kind='degree2']"};
    rules["education_degree3"] = {PatternKind::Regex,
                                  "<span class=\"degree-3\">(.*?)</span>"};
    rules["full_name"] = {PatternKind::Css, ".member-name"};

    Page page{"http://h.test/pub/profile-001",
              "<html><body>"
              "<h1 class=\"member-name\">  Jane   Doe </h1>"
              "<div class=\"positions\">Engineer &amp; Lead</div>"
              "<div id=\"summary\">Builds <b>things</b></div>"
              "<div class=\"degree-1\">BSc, physics</div>"
              "<div data-kind=\"degree2\">MSc, physics</div>"
              "<span class=\"degree-3\">Night school</span>"
              "</body></html>"};

    const RawProfile raw = extract_fields(page, rules);
    CHECK(raw.source_url == page.url);
    CHECK(raw.positions_overview == "Engineer & Lead");
    CHECK(raw.summary_description == "Builds things");
    CHECK(raw.education_degree1 == "BSc, physics");
    CHECK(raw.education_degree2 == "MSc, physics");
    CHECK(raw.education_degree3 == "Night school");
    REQUIRE(raw.personal_fields.count("full_name") == 1);
    CHECK(raw.personal_fields.at("full_name") == "Jane Doe");

    // Misses leave fields absent rather than empty.
    Page sparse{"http://h.test/pub/profile-002",
                "<html><body><div class=\"positions\">Analyst</div></body></html>"};
    const RawProfile sparse_raw = extract_fields(sparse, rules);
    CHECK(sparse_raw.positions_overview == "Analyst");
    CHECK_FALSE(sparse_raw.summary_description.has_value());
    CHECK_FALSE(sparse_raw.education_degree3.has_value());
    CHECK(sparse_raw.personal_fields.empty());
}

TEST_CASE("extract_fields rejects non-markup bodies") {
    SelectorRules rules;
    rules["positions_overview"] = {PatternKind::Css, ".positions"};
    Page binary{"http://h.test/pub/profile-003",
                std::string("\x00\x01binary", 8)};
    try {
        extract_fields(binary, rules);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(std::string(e.what()).find("profile-003") != std::string::npos);
    }
}

TEST_CASE("crawl walks the whole fixture in breadth-first order") {
    testing::ScopedTempDir dir("site");
    const testing::FixtureSite site = build_fixture_site(dir.path(), 2, 2, 3);
    REQUIRE(site.leaves.size() == 12);
    REQUIRE(site.bfs_order.size() == 1 + 2 + 4 + 12);

    FixtureFetcher inner(site.root_dir);
    testing::RecordingFetcher fetcher(inner);
    std::vector<RawProfile> emitted;
    const CrawlConfig cfg = fixture_config(site);
    const CrawlStats stats =
        crawl(cfg, fetcher, [&](RawProfile p) { emitted.push_back(std::move(p)); },
              11);

    CHECK(stats.pages_fetched == site.bfs_order.size());
    CHECK(stats.leaves_found == site.leaves.size());
    CHECK(stats.profiles_emitted == site.leaves.size());
    CHECK(stats.fetch_errors == 0);

    // Exact breadth-first order, each page exactly once.
    CHECK(fetcher.order() == site.bfs_order);
    CHECK(fetcher.duplicates().empty());

    // Every leaf surfaced with the expected field values.
    REQUIRE(emitted.size() == site.leaves.size());
    for (std::size_t i = 0; i < emitted.size(); ++i) {
        const auto& want = site.leaves[i];
        const auto& got = emitted[i];
        CHECK(got.source_url == want.url);
        for (const auto& name : profile_field_names()) {
            const auto it = want.content_fields.find(name);
            const auto val = field(got, name);
            if (it == want.content_fields.end()) {
                CHECK_FALSE(val.has_value());
            } else {
                CHECK(val == it->second);
            }
        }
        CHECK(got.personal_fields == want.personal_fields);
    }
}

TEST_CASE("crawl with randomness stays deterministic and complete") {
    testing::ScopedTempDir dir("site");
    const testing::FixtureSite site = build_fixture_site(dir.path(), 2, 2, 2);

    auto run = [&](std::uint64_t seed) {
        FixtureFetcher inner(site.root_dir);
        testing::RecordingFetcher fetcher(inner);
        std::vector<std::string> leaf_urls;
        CrawlConfig cfg = fixture_config(site);
        cfg.randomness = 0.7;
        crawl(cfg, fetcher, [&](RawProfile p) { leaf_urls.push_back(p.source_url); },
              seed);
        return std::make_pair(fetcher.order(), leaf_urls);
    };

    const auto a = run(21);
    const auto b = run(21);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);

    // All pages still get fetched exactly once, just in another order.
    CHECK(a.first.size() == site.bfs_order.size());
    std::set<std::string> fetched(a.first.begin(), a.first.end());
    std::set<std::string> expected(site.bfs_order.begin(), site.bfs_order.end());
    CHECK(fetched == expected);
    CHECK(a.first != site.bfs_order);  // the shuffle actually changed something

    const auto c = run(22);
    CHECK(c.first != a.first);
}

TEST_CASE("crawl never leaves the seed host or refetches") {
    testing::ScopedTempDir dir("site");
    const testing::FixtureSite site = build_fixture_site(dir.path(), 1, 2, 2);
    FixtureFetcher inner(site.root_dir);
    testing::RecordingFetcher fetcher(inner);
    crawl(fixture_config(site), fetcher, [](RawProfile) {}, 3);

    const std::string host = url_host(site.seed_url);
    for (const auto& url : fetcher.order()) {
        CHECK(url_host(url) == host);
    }
    CHECK(fetcher.duplicates().empty());
}

TEST_CASE("max_pages caps the fetch budget") {
    testing::ScopedTempDir dir("site");
    const testing::FixtureSite site = build_fixture_site(dir.path(), 2, 2, 3);
    FixtureFetcher inner(site.root_dir);
    testing::RecordingFetcher fetcher(inner);
    CrawlConfig cfg = fixture_config(site);
    cfg.max_pages = 5;
    const CrawlStats stats = crawl(cfg, fetcher, [](RawProfile) {}, 1);
    CHECK(stats.pages_fetched == 5);
    CHECK(fetcher.order().size() == 5);
    CHECK(std::equal(fetcher.order().begin(), fetcher.order().end(),
                     site.bfs_order.begin()));
}

TEST_CASE("an unfetchable seed is fatal") {
    testing::ScopedTempDir dir("empty");
    FixtureFetcher fetcher(dir.path());
    CrawlConfig cfg;
    cfg.seed_url = "http://nowhere.test/";
    cfg.politeness_delay = std::chrono::milliseconds(0);
    cfg.selector_rules["positions_overview"] = {PatternKind::Css, ".positions"};
    cfg.leaf_pattern = {LeafRule::Kind::UrlRegex, "profile"};
    CHECK_THROWS_AS(crawl(cfg, fetcher, [](RawProfile) {}, 1), StageError);
}

TEST_CASE("fetch failures below the seed are logged and skipped") {
    testing::ScopedTempDir dir("site");
    const testing::FixtureSite site = build_fixture_site(dir.path(), 1, 1, 3);
    // Remove one leaf file; the crawl carries on.
    std::remove((site.root_dir + "/pub/profile-000.html").c_str());

    FixtureFetcher fetcher(site.root_dir);
    std::vector<std::string> log;
    std::vector<RawProfile> emitted;
    const CrawlStats stats = crawl(
        fixture_config(site), fetcher,
        [&](RawProfile p) { emitted.push_back(std::move(p)); }, 2,
        [&](const std::string& line) { log.push_back(line); });

    CHECK(stats.fetch_errors == 1);
    CHECK(stats.profiles_emitted == site.leaves.size() - 1);
    CHECK(emitted.size() == site.leaves.size() - 1);
    const bool logged = std::any_of(log.begin(), log.end(), [](const std::string& s) {
        return s.find("profile-000") != std::string::npos;
    });
    CHECK(logged);
}

TEST_CASE("politeness delay spaces out fetches") {
    testing::ScopedTempDir dir("site");
    const testing::FixtureSite site = build_fixture_site(dir.path(), 1, 1, 1);
    FixtureFetcher fetcher(site.root_dir);
    CrawlConfig cfg = fixture_config(site);
    cfg.politeness_delay = std::chrono::milliseconds(40);

    const auto start = std::chrono::steady_clock::now();
    const CrawlStats stats = crawl(cfg, fetcher, [](RawProfile) {}, 1);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    // 4 pages -> at least 3 full gaps.
    REQUIRE(stats.pages_fetched == 4);
    CHECK(elapsed.count() >= 3 * 40 - 10);
}

TEST_CASE("crawl config validation") {
    CrawlConfig cfg;
    cfg.seed_url = "http://h.test/";
    cfg.selector_rules["positions_overview"] = {PatternKind::Css, ".p"};
    cfg.leaf_pattern = {LeafRule::Kind::UrlRegex, "x"};
    CHECK_NOTHROW(cfg.validate());

    CrawlConfig bad = cfg;
    bad.seed_url = "";
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.randomness = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.randomness = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.max_pages = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.selector_rules.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.leaf_pattern.pattern = "";
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.max_concurrent_fetches = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("selector rules loader validates kinds") {
    testing::ScopedTempDir dir("rules");
    const std::string good = dir.file("rules.json");
    write_file(
        good,
        R"({"positions_overview":{"pattern_kind":"css","pattern":".p"},)"
        R"("education_degree3":{"pattern_kind":"regex","pattern":"<b>(.*?)</b>"},)"
        R"("location":{"pattern_kind":"xpath-like","pattern":"//span[@id='loc']"}})");
    const SelectorRules rules = load_selector_rules(good);
    REQUIRE(rules.size() == 3);
    CHECK(rules.at("positions_overview").kind == PatternKind::Css);
    CHECK(rules.at("education_degree3").kind == PatternKind::Regex);
    CHECK(rules.at("location").kind == PatternKind::XPathLike);

    const std::string bad = dir.file("bad.json");
    write_file(bad, R"({"positions_overview":{"pattern_kind":"nope","pattern":"x"}})");
    CHECK_THROWS_AS(load_selector_rules(bad), ConfigError);
}
