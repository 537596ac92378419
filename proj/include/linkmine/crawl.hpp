#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "linkmine/profile.hpp"
#include "linkmine/util.hpp"

namespace linkmine {

// --- URLs ---

// Canonical form: lowercase scheme/host, default port elided, fragment
// stripped, dot-segments resolved. Throws ParseError on URLs without a
// scheme+host.
std::string canonicalize_url(const std::string& url);

// Resolves href against the page URL (absolute, scheme-relative,
// root-relative, relative, query-only) and canonicalizes. Returns nullopt
// for non-http(s) schemes (mailto:, javascript:, ...).
std::optional<std::string> resolve_url(const std::string& base,
                                       const std::string& href);

std::string url_host(const std::string& canonical_url);
std::string url_path(const std::string& canonical_url);

// --- configuration ---

enum class PatternKind { Css, XPathLike, Regex };

struct SelectorRule {
    PatternKind kind = PatternKind::Css;
    std::string pattern;
};

// Field name -> rule. The five content fields feed RawProfile field
// slots; any other name is captured as a transient personal field that
// the anonymize boundary drops.
using SelectorRules = std::map<std::string, SelectorRule>;

SelectorRules load_selector_rules(const std::string& path);

struct LeafRule {
    enum class Kind { UrlRegex, ContentRegex } kind = Kind::UrlRegex;
    std::string pattern;
};

struct CrawlConfig {
    std::string seed_url;
    double randomness = 0.0;  // in [0, 1]
    std::size_t max_pages = 1000;
    std::chrono::milliseconds politeness_delay{500};
    std::size_t max_concurrent_fetches = 1;
    SelectorRules selector_rules;
    LeafRule leaf_pattern;

    void validate() const;
};

// --- fetching ---

struct Page {
    std::string url;  // canonical
    std::string body;
};

class Fetcher {
public:
    virtual ~Fetcher() = default;
    // nullopt on fetch failure (missing file, HTTP error, timeout).
    virtual std::optional<Page> fetch(const std::string& canonical_url) = 0;
};

// Serves files from a local directory: URL path "/a/b" maps to
// "<root>/a/b", with ".html" appended when the last segment has no
// extension and "/" mapping to index.html.
class FixtureFetcher : public Fetcher {
public:
    explicit FixtureFetcher(std::string root_dir);
    std::optional<Page> fetch(const std::string& canonical_url) override;
    static std::string url_to_relpath(const std::string& canonical_url);

private:
    std::string root_;
};

// Plain HTTP(S is out of scope) fetcher; provided for live use, not
// exercised by the test suite.
class HttpFetcher : public Fetcher {
public:
    explicit HttpFetcher(
        std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
    std::optional<Page> fetch(const std::string& canonical_url) override;

private:
    std::chrono::milliseconds timeout_;
};

// --- frontier ---

// Pending-link queue plus visited set. A URL is never in both: enqueue
// refuses known URLs, and select_next moves the pick into visited.
class Frontier {
public:
    bool enqueue(const std::string& canonical_url);
    // Head with probability 1-randomness, uniform queue element otherwise.
    // The pick leaves the queue and enters visited. Throws logic_error on
    // an empty queue.
    std::string select_next(double randomness, Rng& rng);
    bool queue_empty() const { return queue_.empty(); }
    std::size_t queue_size() const { return queue_.size(); }
    bool visited(const std::string& canonical_url) const;
    std::size_t visited_count() const { return visited_.size(); }

private:
    std::deque<std::string> queue_;
    std::unordered_set<std::string> queued_;
    std::unordered_set<std::string> visited_;
};

// --- page handling ---

enum class PageKind { Leaf, DirectoryLevel };

PageKind classify_page(const Page& page, const LeafRule& rule);

// Applies each selector rule to the document; misses leave the field
// absent. Text is whitespace-normalized. Throws StageError (carrying the
// URL) when the document is not parseable as markup.
RawProfile extract_fields(const Page& page, const SelectorRules& rules);

// --- the crawl ---

struct CrawlStats {
    std::size_t pages_fetched = 0;  // fetch attempts
    std::size_t leaves_found = 0;
    std::size_t fetch_errors = 0;
    std::size_t profiles_emitted = 0;
};

using ProfileSink = std::function<void(RawProfile)>;
using CrawlLogger = std::function<void(const std::string&)>;

// Explores the directory hierarchy from the seed and emits a RawProfile
// per leaf page, until the frontier is exhausted or max_pages fetches
// are spent. Stays on the seed's host. Fetch failures are logged and
// skipped; an unfetchable seed is fatal (StageError).
CrawlStats crawl(const CrawlConfig& config, Fetcher& fetcher, ProfileSink sink,
                 std::uint64_t seed, CrawlLogger logger = nullptr);

}  // namespace linkmine
