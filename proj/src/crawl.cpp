#include "linkmine/crawl.hpp"

#include <algorithm>
#include <condition_variable>
#include <filesystem>
#include <regex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "linkmine/html.hpp"

namespace linkmine {

namespace fs = std::filesystem;

// --- URLs ---

namespace {

struct UrlParts {
    std::string scheme;
    std::string host;  // may include :port
    std::string path;
    std::string query;  // without '?'
};

std::optional<UrlParts> parse_url(const std::string& url) {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos || scheme_end == 0) return std::nullopt;
    UrlParts p;
    p.scheme = utf8::to_lower(url.substr(0, scheme_end));
    std::size_t i = scheme_end + 3;
    std::size_t path_start = url.find_first_of("/?#", i);
    if (path_start == std::string::npos) path_start = url.size();
    p.host = utf8::to_lower(url.substr(i, path_start - i));
    if (p.host.empty()) return std::nullopt;
    std::size_t rest = path_start;
    if (rest < url.size() && url[rest] == '/') {
        std::size_t path_end = url.find_first_of("?#", rest);
        if (path_end == std::string::npos) path_end = url.size();
        p.path = url.substr(rest, path_end - rest);
        rest = path_end;
    } else {
        p.path = "/";
    }
    if (rest < url.size() && url[rest] == '?') {
        std::size_t qend = url.find('#', rest);
        if (qend == std::string::npos) qend = url.size();
        p.query = url.substr(rest + 1, qend - rest - 1);
    }
    return p;  // fragment dropped
}

std::string normalize_dot_segments(const std::string& path) {
    std::vector<std::string> out;
    for (const std::string& seg : split(path, '/')) {
        if (seg.empty() || seg == ".") continue;
        if (seg == "..") {
            if (!out.empty()) out.pop_back();
            continue;
        }
        out.push_back(seg);
    }
    std::string result = "/" + join(out, "/");
    if (path.size() > 1 && path.back() == '/' && result != "/") result += "/";
    return result;
}

std::string strip_default_port(const std::string& scheme,
                               const std::string& host) {
    if (scheme == "http" && host.ends_with(":80")) {
        return host.substr(0, host.size() - 3);
    }
    if (scheme == "https" && host.ends_with(":443")) {
        return host.substr(0, host.size() - 4);
    }
    return host;
}

std::string assemble(const UrlParts& p) {
    std::string url = p.scheme + "://" + strip_default_port(p.scheme, p.host) +
                      normalize_dot_segments(p.path);
    if (!p.query.empty()) url += "?" + p.query;
    return url;
}

}  // namespace

std::string canonicalize_url(const std::string& url) {
    auto p = parse_url(url);
    if (!p) throw ParseError("not an absolute URL: " + url);
    return assemble(*p);
}

std::optional<std::string> resolve_url(const std::string& base,
                                       const std::string& href) {
    const std::string h = trim(href);
    if (h.empty() || h[0] == '#') return std::nullopt;
    const std::size_t colon = h.find(':');
    const std::size_t slash = h.find('/');
    if (colon != std::string::npos && (slash == std::string::npos || colon < slash)) {
        // Has a scheme.
        const std::string scheme = utf8::to_lower(h.substr(0, colon));
        if (scheme != "http" && scheme != "https") return std::nullopt;
        auto p = parse_url(h);
        if (!p) return std::nullopt;
        return assemble(*p);
    }
    auto b = parse_url(base);
    if (!b) return std::nullopt;
    UrlParts p = *b;
    p.query.clear();
    if (h.starts_with("//")) {
        auto abs = parse_url(b->scheme + ":" + h);
        if (!abs) return std::nullopt;
        return assemble(*abs);
    }
    if (h[0] == '/') {
        std::size_t qpos = h.find('?');
        p.path = qpos == std::string::npos ? h : h.substr(0, qpos);
        if (qpos != std::string::npos) {
            std::size_t frag = h.find('#', qpos);
            p.query = h.substr(qpos + 1, frag == std::string::npos
                                             ? std::string::npos
                                             : frag - qpos - 1);
        }
        return assemble(p);
    }
    if (h[0] == '?') {
        std::size_t frag = h.find('#');
        p.query = h.substr(1, frag == std::string::npos ? std::string::npos
                                                        : frag - 1);
        return assemble(p);
    }
    // Relative path: resolve against the base directory.
    std::string dir = b->path;
    std::size_t last_slash = dir.rfind('/');
    dir = last_slash == std::string::npos ? "/" : dir.substr(0, last_slash + 1);
    std::size_t qpos = h.find('?');
    std::string rel_path = qpos == std::string::npos ? h : h.substr(0, qpos);
    std::size_t frag = rel_path.find('#');
    if (frag != std::string::npos) rel_path = rel_path.substr(0, frag);
    p.path = dir + rel_path;
    if (qpos != std::string::npos) {
        std::string q = h.substr(qpos + 1);
        std::size_t f2 = q.find('#');
        if (f2 != std::string::npos) q = q.substr(0, f2);
        p.query = q;
    }
    return assemble(p);
}

std::string url_host(const std::string& canonical_url) {
    auto p = parse_url(canonical_url);
    return p ? p->host : "";
}

std::string url_path(const std::string& canonical_url) {
    auto p = parse_url(canonical_url);
    return p ? p->path : "/";
}

// --- configuration ---

void CrawlConfig::validate() const {
    if (seed_url.empty()) throw ConfigError("crawl: seed_url is required");
    if (!(randomness >= 0.0 && randomness <= 1.0)) {
        throw ConfigError("crawl: randomness must be in [0, 1]");
    }
    if (max_pages < 1) throw ConfigError("crawl: max_pages must be >= 1");
    if (max_concurrent_fetches < 1) {
        throw ConfigError("crawl: max_concurrent_fetches must be >= 1");
    }
    if (selector_rules.empty()) {
        throw ConfigError("crawl: at least one selector rule is required");
    }
    if (leaf_pattern.pattern.empty()) {
        throw ConfigError("crawl: leaf_pattern is required");
    }
    if (politeness_delay.count() < 0) {
        throw ConfigError("crawl: politeness_delay must be >= 0");
    }
}

SelectorRules load_selector_rules(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("selector rules " + path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("selector rules " + path + ": expected an object");
    }
    SelectorRules rules;
    for (const auto& [field, spec] : j.items()) {
        if (!spec.is_object() || !spec.contains("pattern_kind") ||
            !spec.contains("pattern")) {
            throw ConfigError("selector rules " + path + ": field '" + field +
                              "' needs pattern_kind and pattern");
        }
        const std::string kind = spec["pattern_kind"].get<std::string>();
        SelectorRule rule;
        if (kind == "css") {
            rule.kind = PatternKind::Css;
        } else if (kind == "xpath-like") {
            rule.kind = PatternKind::XPathLike;
        } else if (kind == "regex") {
            rule.kind = PatternKind::Regex;
        } else {
            throw ConfigError("selector rules " + path + ": unknown kind '" +
                              kind + "'");
        }
        rule.pattern = spec["pattern"].get<std::string>();
        rules[field] = rule;
    }
    return rules;
}

// --- fetchers ---

FixtureFetcher::FixtureFetcher(std::string root_dir) : root_(std::move(root_dir)) {}

std::string FixtureFetcher::url_to_relpath(const std::string& canonical_url) {
    std::string path = url_path(canonical_url);
    if (path == "/" || path.empty()) return "index.html";
    if (path.front() == '/') path.erase(0, 1);
    if (path.back() == '/') path += "index.html";
    const std::size_t last_slash = path.rfind('/');
    const std::string last_seg =
        last_slash == std::string::npos ? path : path.substr(last_slash + 1);
    if (last_seg.find('.') == std::string::npos) path += ".html";
    return path;
}

std::optional<Page> FixtureFetcher::fetch(const std::string& canonical_url) {
    const fs::path file = fs::path(root_) / url_to_relpath(canonical_url);
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) return std::nullopt;
    try {
        return Page{canonical_url, read_file(file.string())};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

HttpFetcher::HttpFetcher(std::chrono::milliseconds timeout) : timeout_(timeout) {}

std::optional<Page> HttpFetcher::fetch(const std::string& canonical_url) {
    auto parts = parse_url(canonical_url);
    if (!parts || parts->scheme != "http") {
        // TLS is not compiled in; https targets are skipped.
        return std::nullopt;
    }
    httplib::Client client(("http://" + parts->host).c_str());
    const auto secs =
        std::chrono::duration_cast<std::chrono::seconds>(timeout_).count();
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_follow_location(true);
    std::string target = parts->path;
    if (!parts->query.empty()) target += "?" + parts->query;
    auto res = client.Get(target.c_str());
    if (!res || res->status != 200) return std::nullopt;
    return Page{canonical_url, res->body};
}

// --- frontier ---

bool Frontier::enqueue(const std::string& canonical_url) {
    if (visited_.count(canonical_url) || queued_.count(canonical_url)) {
        return false;
    }
    queued_.insert(canonical_url);
    queue_.push_back(canonical_url);
    return true;
}

std::string Frontier::select_next(double randomness, Rng& rng) {
    if (queue_.empty()) throw std::logic_error("frontier: queue is empty");
    std::size_t idx = 0;
    if (randomness > 0.0 && rng.next_bernoulli(randomness)) {
        idx = rng.next_index(queue_.size());
    }
    std::string url = queue_[idx];
    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(idx));
    queued_.erase(url);
    visited_.insert(url);
    return url;
}

bool Frontier::visited(const std::string& canonical_url) const {
    return visited_.count(canonical_url) > 0;
}

// --- page handling ---

PageKind classify_page(const Page& page, const LeafRule& rule) {
    const std::regex re(rule.pattern, std::regex::ECMAScript);
    const std::string& subject =
        rule.kind == LeafRule::Kind::UrlRegex ? page.url : page.body;
    return std::regex_search(subject, re) ? PageKind::Leaf
                                          : PageKind::DirectoryLevel;
}

namespace {

std::optional<std::string> apply_css(const Page& page, const std::string& sel) {
    std::string tag, cls, id;
    std::size_t i = 0;
    while (i < sel.size() && sel[i] != '.' && sel[i] != '#') ++i;
    tag = sel.substr(0, i);
    if (i < sel.size()) {
        if (sel[i] == '.') {
            cls = sel.substr(i + 1);
        } else {
            id = sel.substr(i + 1);
        }
    }
    std::optional<html::Element> el;
    if (!id.empty()) {
        el = html::find_by_attr(page.body, tag, "id", id);
    } else if (!cls.empty()) {
        el = html::find_by_class(page.body, tag, cls);
    } else if (!tag.empty()) {
        auto all = html::find_elements(page.body, tag);
        if (!all.empty()) el = all.front();
    } else {
        throw ConfigError("empty css selector");
    }
    if (!el) return std::nullopt;
    return html::inner_text(el->inner_html);
}

// Supports //tag, //tag[@attr='value'], //*[@attr='value'].
std::optional<std::string> apply_xpath_like(const Page& page,
                                            const std::string& expr) {
    static const std::regex form(
        R"(^//([A-Za-z0-9*-]+)(?:\[@([A-Za-z0-9_-]+)='([^']*)'\])?$)");
    std::smatch m;
    if (!std::regex_match(expr, m, form)) {
        throw ConfigError("unsupported xpath-like expression: " + expr);
    }
    std::string tag = m[1].str() == "*" ? "" : m[1].str();
    std::optional<html::Element> el;
    if (m[2].matched) {
        if (m[2].str() == "class") {
            el = html::find_by_class(page.body, tag, m[3].str());
        } else {
            el = html::find_by_attr(page.body, tag, m[2].str(), m[3].str());
        }
    } else {
        auto all = html::find_elements(page.body, tag);
        if (!all.empty()) el = all.front();
    }
    if (!el) return std::nullopt;
    return html::inner_text(el->inner_html);
}

std::optional<std::string> apply_regex(const Page& page,
                                       const std::string& pattern) {
    const std::regex re(pattern, std::regex::ECMAScript);
    std::smatch m;
    if (!std::regex_search(page.body, m, re)) return std::nullopt;
    const std::string raw = m.size() > 1 && m[1].matched ? m[1].str() : m[0].str();
    return html::inner_text(raw);
}

}  // namespace

RawProfile extract_fields(const Page& page, const SelectorRules& rules) {
    if (page.body.find('\0') != std::string::npos) {
        throw StageError("extract_fields: not a markup document: " + page.url);
    }
    RawProfile raw;
    raw.source_url = page.url;
    for (const auto& [field, rule] : rules) {
        std::optional<std::string> value;
        switch (rule.kind) {
            case PatternKind::Css:
                value = apply_css(page, rule.pattern);
                break;
            case PatternKind::XPathLike:
                value = apply_xpath_like(page, rule.pattern);
                break;
            case PatternKind::Regex:
                value = apply_regex(page, rule.pattern);
                break;
        }
        if (!value) continue;
        if (field == "positions_overview") {
            raw.positions_overview = *value;
        } else if (field == "summary_description") {
            raw.summary_description = *value;
        } else if (field == "education_degree1") {
            raw.education_degree1 = *value;
        } else if (field == "education_degree2") {
            raw.education_degree2 = *value;
        } else if (field == "education_degree3") {
            raw.education_degree3 = *value;
        } else {
            // Transient personal capture; dropped at the anonymize boundary.
            raw.personal_fields[field] = *value;
        }
    }
    return raw;
}

// --- the crawl ---

namespace {

class PolitenessGate {
public:
    explicit PolitenessGate(std::chrono::milliseconds delay) : delay_(delay) {}

    // Blocks until the host's slot is free, then claims the next slot.
    void pass(const std::string& host) {
        if (delay_.count() == 0) return;
        std::chrono::steady_clock::time_point wake;
        {
            std::lock_guard<std::mutex> lock(mu_);
            const auto now = std::chrono::steady_clock::now();
            auto it = next_allowed_.find(host);
            wake = (it == next_allowed_.end() || it->second < now) ? now
                                                                   : it->second;
            next_allowed_[host] = wake + delay_;
        }
        std::this_thread::sleep_until(wake);
    }

private:
    std::chrono::milliseconds delay_;
    std::mutex mu_;
    std::map<std::string, std::chrono::steady_clock::time_point> next_allowed_;
};

struct SharedCrawlState {
    Frontier frontier;
    Rng rng;
    CrawlStats stats;
    std::mutex mu;
    std::condition_variable cv;
    std::size_t in_flight = 0;
    bool budget_spent = false;

    explicit SharedCrawlState(std::uint64_t seed) : rng(seed) {}
};

}  // namespace

CrawlStats crawl(const CrawlConfig& config, Fetcher& fetcher, ProfileSink sink,
                 std::uint64_t seed, CrawlLogger logger) {
    config.validate();
    auto log = [&](const std::string& msg) {
        if (logger) logger(msg);
    };

    const std::string seed_url = canonicalize_url(config.seed_url);
    const std::string host = url_host(seed_url);
    PolitenessGate gate(config.politeness_delay);
    SharedCrawlState state(seed);

    std::mutex sink_mu;

    // Processes one fetched page: emit a profile or expand the frontier.
    auto handle_page = [&](const Page& page) {
        if (classify_page(page, config.leaf_pattern) == PageKind::Leaf) {
            RawProfile raw = extract_fields(page, config.selector_rules);
            {
                std::lock_guard<std::mutex> lock(sink_mu);
                sink(std::move(raw));
            }
            std::lock_guard<std::mutex> lock(state.mu);
            ++state.stats.leaves_found;
            ++state.stats.profiles_emitted;
        } else {
            std::vector<std::string> children;
            for (const std::string& href : html::extract_links(page.body)) {
                auto resolved = resolve_url(page.url, href);
                if (!resolved) continue;
                if (url_host(*resolved) != host) continue;  // stay on-site
                children.push_back(std::move(*resolved));
            }
            std::lock_guard<std::mutex> lock(state.mu);
            for (const std::string& child : children) {
                state.frontier.enqueue(child);
            }
        }
    };

    // The seed is fetched synchronously; an unreachable seed is fatal.
    {
        std::lock_guard<std::mutex> lock(state.mu);
        state.frontier.enqueue(seed_url);
        state.frontier.select_next(0.0, state.rng);
        ++state.stats.pages_fetched;
    }
    gate.pass(host);
    auto seed_page = fetcher.fetch(seed_url);
    if (!seed_page) {
        throw StageError("crawl: seed unfetchable: " + seed_url);
    }
    handle_page(*seed_page);

    auto worker = [&] {
        for (;;) {
            std::string url;
            {
                std::unique_lock<std::mutex> lock(state.mu);
                state.cv.wait(lock, [&] {
                    return !state.frontier.queue_empty() ||
                           state.in_flight == 0 || state.budget_spent;
                });
                if (state.budget_spent ||
                    state.stats.pages_fetched >= config.max_pages) {
                    state.budget_spent = true;
                    state.cv.notify_all();
                    return;
                }
                if (state.frontier.queue_empty()) {
                    if (state.in_flight == 0) {
                        state.cv.notify_all();
                        return;
                    }
                    continue;  // others may still enqueue
                }
                url = state.frontier.select_next(config.randomness, state.rng);
                ++state.stats.pages_fetched;
                ++state.in_flight;
            }
            gate.pass(url_host(url));
            auto page = fetcher.fetch(url);
            if (page) {
                try {
                    handle_page(*page);
                } catch (const StageError& e) {
                    log(std::string("extract error: ") + e.what());
                    std::lock_guard<std::mutex> lock(state.mu);
                    ++state.stats.fetch_errors;
                }
            } else {
                log("fetch failed: " + url);
                std::lock_guard<std::mutex> lock(state.mu);
                ++state.stats.fetch_errors;
            }
            {
                std::lock_guard<std::mutex> lock(state.mu);
                --state.in_flight;
            }
            state.cv.notify_all();
        }
    };

    if (config.max_concurrent_fetches == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(config.max_concurrent_fetches);
        for (std::size_t i = 0; i < config.max_concurrent_fetches; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) t.join();
    }
    return state.stats;
}

}  // namespace linkmine
