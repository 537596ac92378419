#include "linkmine/pipeline.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>

#include <nlohmann/json.hpp>

#include "linkmine/classify.hpp"
#include "linkmine/cluster.hpp"
#include "linkmine/crawl.hpp"
#include "linkmine/profile.hpp"
#include "linkmine/stopwords.hpp"
#include "linkmine/textpipe.hpp"
#include "linkmine/util.hpp"

namespace linkmine {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// --- config parsing ---

namespace {

bool is_comment_or_blank(const std::string& line) {
    for (char c : line) {
        if (c == ' ' || c == '\t') continue;
        return c == '#' || c == ';';
    }
    return true;
}

std::uint64_t parse_u64_value(const std::string& value,
                              const std::string& key) {
    std::uint64_t out = 0;
    const char* first = value.data();
    const char* last = first + value.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || p != last) {
        throw ConfigError(key + ": expected a non-negative integer, got \"" +
                          value + "\"");
    }
    return out;
}

double parse_double_value(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(value, &pos);
        if (pos == value.size()) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got \"" + value + "\"");
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text,
                           const std::string& origin) {
    RunConfig out;
    std::string section = "run";
    std::size_t line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        if (is_comment_or_blank(raw)) continue;
        const std::string line = trim(raw);
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(origin + ": line " +
                                  std::to_string(line_no) +
                                  ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ConfigError(origin + ": line " +
                                  std::to_string(line_no) +
                                  ": empty section name");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError(origin + ": line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!out.entries_.emplace(key, value).second) {
            throw ConfigError(origin + ": line " + std::to_string(line_no) +
                              ": duplicate key " + key);
        }
    }
    return out;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    if (!fs::is_regular_file(path)) {
        throw ConfigError("config file not found: " + path);
    }
    return parse(read_file(path), path);
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string RunConfig::get_or(const std::string& key,
                              std::string fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? std::move(fallback) : it->second;
}

const std::string& RunConfig::require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError("missing required config key: " + key);
    }
    return it->second;
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
    auto v = get(key);
    return v ? parse_u64_value(*v, key) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? parse_double_value(*v, key) : fallback;
}

void RunConfig::set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
}

// --- stages ---

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Crawl: return "crawl";
        case Stage::Filter: return "filter";
        case Stage::Classify: return "classify";
        case Stage::Dtm: return "dtm";
        case Stage::Cluster: return "cluster";
        case Stage::Report: return "report";
    }
    throw std::logic_error("unknown stage");
}

std::vector<Stage> parse_stages(const std::string& csv) {
    static constexpr std::array<Stage, 6> kOrder{
        Stage::Crawl, Stage::Filter, Stage::Classify,
        Stage::Dtm,   Stage::Cluster, Stage::Report};
    std::vector<Stage> out;
    for (const std::string& part : split(csv, ',')) {
        const std::string name = trim(part);
        if (name.empty()) continue;
        bool found = false;
        for (Stage s : kOrder) {
            if (name == stage_name(s)) {
                out.push_back(s);
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("unknown stage: " + name);
    }
    if (out.empty()) throw ConfigError("stages: no stages selected");
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (static_cast<int>(out[i]) <= static_cast<int>(out[i - 1])) {
            throw ConfigError(
                "stages must be distinct and follow the order "
                "crawl,filter,classify,dtm,cluster,report");
        }
    }
    return out;
}

namespace {

struct StageCtx {
    const RunConfig& config;
    std::string out_dir;
    std::uint64_t seed = 0;
    // Artifact file names produced by earlier stages of this run.
    std::set<std::string> produced;
    StageRecord* rec = nullptr;
};

std::string artifact_path(const StageCtx& ctx, const std::string& name) {
    return ctx.out_dir + "/" + name;
}

// Explicit config path if given, else the artifact an earlier stage of
// this run produced; otherwise the input is missing.
std::string resolve_input(const StageCtx& ctx, const std::string& cfg_key,
                          const std::string& artifact, const char* stage) {
    if (auto p = ctx.config.get(cfg_key)) return *p;
    if (ctx.produced.count(artifact)) return artifact_path(ctx, artifact);
    throw StageError(std::string(stage) + ": missing input " + artifact +
                     " (produce it with an earlier stage or set " + cfg_key +
                     ")");
}

void record_artifact(StageCtx& ctx, const std::string& name) {
    ctx.rec->digests[name] = fnv1a64_hex(read_file(artifact_path(ctx, name)));
    ctx.produced.insert(name);
}

void check_file(const std::string& key, const std::string& path) {
    if (!fs::is_regular_file(path)) {
        throw ConfigError(key + ": file not found: " + path);
    }
}

void check_dir(const std::string& key, const std::string& path) {
    if (!fs::is_directory(path)) {
        throw ConfigError(key + ": directory not found: " + path);
    }
}

}  // namespace

// -- crawl --

CrawlConfig crawl_config_from(const RunConfig& config) {
    CrawlConfig cc;
    cc.seed_url = config.require("crawl.seed_url");
    cc.randomness = config.get_double("crawl.randomness", 0.0);
    cc.max_pages = config.get_u64("crawl.max_pages", 1000);
    cc.politeness_delay =
        std::chrono::milliseconds(config.get_u64("crawl.politeness_ms", 500));
    cc.max_concurrent_fetches = config.get_u64("crawl.max_concurrent", 1);
    const std::string selectors = config.require("crawl.selectors");
    check_file("crawl.selectors", selectors);
    cc.selector_rules = load_selector_rules(selectors);
    const auto url_re = config.get("crawl.leaf_url_regex");
    const auto content_re = config.get("crawl.leaf_content_regex");
    if (url_re.has_value() == content_re.has_value()) {
        throw ConfigError(
            "crawl: set exactly one of crawl.leaf_url_regex and "
            "crawl.leaf_content_regex");
    }
    cc.leaf_pattern = url_re
                          ? LeafRule{LeafRule::Kind::UrlRegex, *url_re}
                          : LeafRule{LeafRule::Kind::ContentRegex, *content_re};
    try {
        cc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("crawl: ") + e.what());
    }
    return cc;
}

namespace {

void validate_crawl(const RunConfig& config) {
    crawl_config_from(config);
    const auto fixture = config.get("crawl.fixture_dir");
    const bool live = config.get_or("crawl.live", "false") == "true";
    if (fixture.has_value() == live) {
        throw ConfigError(
            "crawl: set exactly one of crawl.fixture_dir and crawl.live=true");
    }
    if (fixture) check_dir("crawl.fixture_dir", *fixture);
}

void run_crawl(StageCtx& ctx) {
    const CrawlConfig cc = crawl_config_from(ctx.config);
    std::unique_ptr<Fetcher> fetcher;
    const auto fixture = ctx.config.get("crawl.fixture_dir");
    if (fixture) {
        fetcher = std::make_unique<FixtureFetcher>(*fixture);
    } else {
        fetcher = std::make_unique<HttpFetcher>();
    }
    IdGenerator ids(ctx.config.get_or("crawl.id_prefix", "profile"));
    Dataset ds;
    ds.provenance = "crawl " + cc.seed_url;
    CrawlStats stats = crawl(
        cc, *fetcher,
        [&](RawProfile raw) { ds.append(anonymize(raw, ids)); }, ctx.seed);
    write_profiles_jsonl(ds, artifact_path(ctx, "profiles.jsonl"));

    ctx.rec->params["seed_url"] = cc.seed_url;
    ctx.rec->params["randomness"] = format_double(cc.randomness);
    ctx.rec->params["max_pages"] = std::to_string(cc.max_pages);
    ctx.rec->params["politeness_ms"] =
        std::to_string(cc.politeness_delay.count());
    ctx.rec->params["max_concurrent"] =
        std::to_string(cc.max_concurrent_fetches);
    ctx.rec->params["source"] = fixture ? "fixture:" + *fixture : "live";
    ctx.rec->counts["pages_fetched"] = stats.pages_fetched;
    ctx.rec->counts["leaves_found"] = stats.leaves_found;
    ctx.rec->counts["fetch_errors"] = stats.fetch_errors;
    ctx.rec->counts["profiles"] = ds.profiles.size();
    record_artifact(ctx, "profiles.jsonl");
}

// -- filter --

void validate_filter(const RunConfig& config) {
    check_file("filter.stopwords", config.require("filter.stopwords"));
    const double ratio = config.get_double("filter.english_ratio", 0.2);
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("filter.english_ratio: must be in (0, 1)");
    }
    if (auto in = config.get("filter.in")) check_file("filter.in", *in);
}

void run_filter(StageCtx& ctx) {
    const std::string in =
        resolve_input(ctx, "filter.in", "profiles.jsonl", "filter");
    const Dataset ds = read_profiles_jsonl(in);
    const Dataset after_content = filter_min_content(ds);
    const StopwordList stopwords =
        load_stopwords(ctx.config.require("filter.stopwords"));
    const double ratio = ctx.config.get_double("filter.english_ratio", 0.2);
    const Dataset out = filter_english(after_content, stopwords, ratio);
    write_profiles_jsonl(out, artifact_path(ctx, "filtered.jsonl"));
    write_file(artifact_path(ctx, "completeness.json"),
               completeness_report(out).to_json() + "\n");

    ctx.rec->params["in"] = in;
    ctx.rec->params["english_ratio"] = format_double(ratio);
    ctx.rec->params["stopwords"] = ctx.config.require("filter.stopwords");
    ctx.rec->counts["profiles_in"] = ds.profiles.size();
    ctx.rec->counts["after_min_content"] = after_content.profiles.size();
    ctx.rec->counts["profiles_out"] = out.profiles.size();
    record_artifact(ctx, "filtered.jsonl");
    record_artifact(ctx, "completeness.json");
}

// -- classify --

void validate_classify(const RunConfig& config) {
    check_file("classify.keywords", config.require("classify.keywords"));
    if (auto in = config.get("classify.in")) check_file("classify.in", *in);
}

void run_classify(StageCtx& ctx) {
    const std::string in =
        resolve_input(ctx, "classify.in", "filtered.jsonl", "classify");
    const Dataset ds = read_profiles_jsonl(in);
    const KeywordTable kw =
        KeywordTable::load(ctx.config.require("classify.keywords"));
    std::string csv = "id,level\n";
    for (const Profile& p : ds.profiles) {
        csv += p.id;
        csv += ',';
        csv += level_name(classify_profile(p, kw));
        csv += '\n';
    }
    write_file(artifact_path(ctx, "levels.csv"), csv);
    write_file(artifact_path(ctx, "dist.json"),
               level_distribution(ds, kw).to_json() + "\n");

    ctx.rec->params["in"] = in;
    ctx.rec->params["keywords"] = ctx.config.require("classify.keywords");
    ctx.rec->counts["profiles"] = ds.profiles.size();
    record_artifact(ctx, "levels.csv");
    record_artifact(ctx, "dist.json");
}

// -- dtm --

void validate_dtm(const RunConfig& config) {
    check_file("dtm.stopwords", config.require("dtm.stopwords"));
    try {
        parse_corpus_fields(config.get_or("dtm.fields", "positions,summary"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("dtm.fields: ") + e.what());
    }
    const std::string weighting = config.get_or("dtm.weighting", "tfidf");
    if (weighting != "raw" && weighting != "tfidf") {
        throw ConfigError("dtm.weighting: expected raw or tfidf, got \"" +
                          weighting + "\"");
    }
    if (config.get_u64("dtm.min_term_len", 5) == 0) {
        throw ConfigError("dtm.min_term_len: must be >= 1");
    }
    if (auto in = config.get("dtm.in")) check_file("dtm.in", *in);
}

void run_dtm(StageCtx& ctx) {
    const std::string in =
        resolve_input(ctx, "dtm.in", "filtered.jsonl", "dtm");
    const Dataset ds = read_profiles_jsonl(in);
    const std::string fields_csv =
        ctx.config.get_or("dtm.fields", "positions,summary");
    const Corpus corpus = build_corpus(ds, parse_corpus_fields(fields_csv));
    PipelineConfig pc;
    pc.stopwords = load_stopwords(ctx.config.require("dtm.stopwords"));
    pc.min_term_length = ctx.config.get_u64("dtm.min_term_len", 5);
    const auto threshold = static_cast<std::int64_t>(
        ctx.config.get_u64("dtm.threshold", 50));
    pc.frequency_threshold = threshold;
    SparseDtm m = build_dtm(corpus, pc);
    const std::size_t vocab_before = m.vocab.size();
    m = filter_low_frequency(m, threshold);
    const std::string weighting = ctx.config.get_or("dtm.weighting", "tfidf");
    if (weighting == "tfidf") m = tfidf_weight(m);
    save_dtm(m, artifact_path(ctx, "dtm"));

    ctx.rec->params["in"] = in;
    ctx.rec->params["fields"] = fields_csv;
    ctx.rec->params["min_term_len"] = std::to_string(pc.min_term_length);
    ctx.rec->params["threshold"] = std::to_string(threshold);
    ctx.rec->params["weighting"] = weighting;
    ctx.rec->counts["docs"] = m.n_docs();
    ctx.rec->counts["terms_before_threshold"] = vocab_before;
    ctx.rec->counts["terms"] = m.vocab.size();
    ctx.rec->counts["nonzeros"] = m.nonzeros();
    ctx.produced.insert("dtm");
    ctx.rec->digests["dtm/header.json"] =
        fnv1a64_hex(read_file(artifact_path(ctx, "dtm/header.json")));
    ctx.rec->digests["dtm/entries.csv"] =
        fnv1a64_hex(read_file(artifact_path(ctx, "dtm/entries.csv")));
}

// -- cluster --

void validate_cluster(const RunConfig& config) {
    const std::string k = config.get_or("cluster.k", "auto");
    if (k != "auto") {
        if (parse_u64_value(k, "cluster.k") == 0) {
            throw ConfigError("cluster.k: must be auto or >= 1");
        }
    }
    if (config.get_u64("cluster.restarts", 5) == 0) {
        throw ConfigError("cluster.restarts: must be >= 1");
    }
    if (config.get_u64("cluster.k_max", 50) == 0) {
        throw ConfigError("cluster.k_max: must be >= 1");
    }
    if (config.get_u64("cluster.top_n", 50) == 0) {
        throw ConfigError("cluster.top_n: must be >= 1");
    }
    const std::string commonality = config.get_or("cluster.commonality", "0.8");
    if (commonality != "off") {
        const double c = parse_double_value(commonality, "cluster.commonality");
        if (!(c > 0.0 && c <= 1.0)) {
            throw ConfigError("cluster.commonality: must be off or in (0, 1]");
        }
    }
    if (auto dir = config.get("cluster.dtm")) {
        check_file("cluster.dtm", *dir + "/header.json");
    }
}

void run_cluster(StageCtx& ctx) {
    const std::string dtm_dir =
        resolve_input(ctx, "cluster.dtm", "dtm", "cluster");
    const SparseDtm m = load_dtm(dtm_dir);
    ClusterStageOptions options;
    options.k = ctx.config.get_or("cluster.k", "auto");
    options.k_max = ctx.config.get_u64("cluster.k_max", 50);
    options.restarts = ctx.config.get_u64("cluster.restarts", 5);
    options.top_n = ctx.config.get_u64("cluster.top_n", 50);
    options.commonality = ctx.config.get_or("cluster.commonality", "0.8");
    options.seed = ctx.seed;
    const ClusterStageOutcome outcome =
        run_cluster_stage(m, options, ctx.out_dir);
    for (const std::string& name : outcome.artifacts) {
        record_artifact(ctx, name);
    }
    ctx.rec->params["dtm"] = dtm_dir;
    ctx.rec->params["k"] = options.k;
    ctx.rec->params["k_max"] = std::to_string(options.k_max);
    ctx.rec->params["restarts"] = std::to_string(options.restarts);
    ctx.rec->params["top_n"] = std::to_string(options.top_n);
    ctx.rec->params["commonality"] = options.commonality;
    ctx.rec->params["seed"] = std::to_string(options.seed);
    if (options.k == "auto") {
        ctx.rec->params["elbow_degenerate"] =
            outcome.elbow_degenerate ? "true" : "false";
    }
    ctx.rec->counts["docs"] = outcome.docs;
    ctx.rec->counts["zero_docs"] = outcome.zero_docs;
    ctx.rec->counts["k"] = outcome.k;
    ctx.rec->counts["iterations"] = outcome.iterations;
}

// -- report --

void run_report(StageCtx& ctx) {
    const Summary s = emit_summary(ctx.out_dir);
    ctx.rec->counts["bytes_json"] = s.json_text.size();
    ctx.rec->counts["bytes_text"] = s.plain_text.size();
    record_artifact(ctx, "summary.json");
    record_artifact(ctx, "summary.txt");
}

void validate_stage(Stage s, const RunConfig& config) {
    switch (s) {
        case Stage::Crawl: validate_crawl(config); return;
        case Stage::Filter: validate_filter(config); return;
        case Stage::Classify: validate_classify(config); return;
        case Stage::Dtm: validate_dtm(config); return;
        case Stage::Cluster: validate_cluster(config); return;
        case Stage::Report: return;
    }
}

void run_stage(Stage s, StageCtx& ctx) {
    switch (s) {
        case Stage::Crawl: run_crawl(ctx); return;
        case Stage::Filter: run_filter(ctx); return;
        case Stage::Classify: run_classify(ctx); return;
        case Stage::Dtm: run_dtm(ctx); return;
        case Stage::Cluster: run_cluster(ctx); return;
        case Stage::Report: run_report(ctx); return;
    }
}

ordered_json report_to_json(const RunReport& report) {
    ordered_json j;
    j["seed"] = report.seed;
    j["out_dir"] = report.out_dir;
    auto stages = ordered_json::array();
    for (const StageRecord& rec : report.stages) {
        ordered_json sj;
        sj["name"] = rec.name;
        sj["params"] = rec.params;
        sj["counts"] = rec.counts;
        sj["digests"] = rec.digests;
        sj["duration_seconds"] = rec.duration_seconds;
        stages.push_back(std::move(sj));
    }
    j["stages"] = std::move(stages);
    if (!report.failed_stage.empty()) {
        j["failed_stage"] = report.failed_stage;
        j["error"] = report.error;
    }
    return j;
}

}  // namespace

std::string RunReport::to_json_text() const {
    return report_to_json(*this).dump(2) + "\n";
}

RunReport run_pipeline(const RunConfig& config,
                       const std::vector<Stage>& stages) {
    if (stages.empty()) throw ConfigError("stages: no stages selected");
    for (std::size_t i = 1; i < stages.size(); ++i) {
        if (static_cast<int>(stages[i]) <= static_cast<int>(stages[i - 1])) {
            throw ConfigError(
                "stages must be distinct and follow the order "
                "crawl,filter,classify,dtm,cluster,report");
        }
    }

    RunReport report;
    report.seed = parse_u64_value(config.require("run.seed"), "run.seed");
    report.out_dir = config.require("run.out_dir");
    // Validate every stage before any work happens.
    for (Stage s : stages) validate_stage(s, config);

    fs::create_directories(report.out_dir);
    StageCtx ctx{config, report.out_dir, report.seed, {}, nullptr};
    for (Stage s : stages) {
        StageRecord rec;
        rec.name = stage_name(s);
        ctx.rec = &rec;
        const auto start = std::chrono::steady_clock::now();
        try {
            run_stage(s, ctx);
        } catch (const std::exception& e) {
            report.failed_stage = rec.name;
            report.error = e.what();
            write_file(report.out_dir + "/run_report.json",
                       report.to_json_text());
            throw;
        }
        rec.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        report.stages.push_back(std::move(rec));
    }
    write_file(report.out_dir + "/run_report.json", report.to_json_text());
    return report;
}

// --- cluster stage core ---

namespace {

// Seed salt matches the per-k restart schedule of elbow_scan, so a fixed
// --k run reproduces the scan's best result for that k.
ClusteringResult best_of_restarts(const SparseDtm& m, std::size_t k,
                                  std::size_t restarts, std::uint64_t seed) {
    Rng base(seed);
    ClusteringResult best;
    bool have = false;
    for (std::size_t rs = 0; rs < restarts; ++rs) {
        ClusteringResult r = kmeans(m, k, base.derive(k * 1000003 + rs));
        if (!have || r.total_wcss < best.total_wcss) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

}  // namespace

ClusterStageOutcome run_cluster_stage(const SparseDtm& m,
                                      const ClusterStageOptions& options,
                                      const std::string& out_dir) {
    if (options.restarts == 0) {
        throw std::invalid_argument("cluster: restarts must be >= 1");
    }
    if (options.k_max == 0) {
        throw std::invalid_argument("cluster: k_max must be >= 1");
    }
    if (options.top_n == 0) {
        throw std::invalid_argument("cluster: top_n must be >= 1");
    }
    double commonality = 0.0;
    const bool subtract = options.commonality != "off";
    if (subtract) {
        commonality = parse_double_value(options.commonality, "commonality");
        if (!(commonality > 0.0 && commonality <= 1.0)) {
            throw std::invalid_argument(
                "cluster: commonality must be off or in (0, 1]");
        }
    }
    fs::create_directories(out_dir);

    ClusterStageOutcome outcome;
    outcome.docs = m.n_docs();
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file(out_dir + "/" + name, content);
        outcome.artifacts.push_back(name);
    };

    ClusteringResult result;
    if (options.k == "auto") {
        const std::size_t k_max =
            std::min<std::size_t>(options.k_max, m.non_empty_docs());
        if (k_max < 3) {
            throw StageError(
                "cluster: elbow detection needs at least 3 scannable k "
                "values; set an explicit k");
        }
        ElbowScanResult scan =
            elbow_scan(m, 1, k_max, options.restarts, options.seed);
        const ElbowChoice choice = detect_elbow(scan.curve);
        outcome.elbow_degenerate = choice.degenerate;
        std::string elbow_csv = "k,wcss\n";
        for (const auto& pt : scan.curve.points) {
            elbow_csv += std::to_string(pt.k);
            elbow_csv += ',';
            elbow_csv += format_double(pt.wcss);
            elbow_csv += '\n';
        }
        emit("elbow.csv", elbow_csv);
        for (std::size_t i = 0; i < scan.curve.points.size(); ++i) {
            if (scan.curve.points[i].k == choice.k) {
                result = std::move(scan.best[i]);
                break;
            }
        }
    } else {
        const auto k =
            static_cast<std::size_t>(parse_u64_value(options.k, "k"));
        if (k == 0) throw std::invalid_argument("cluster: k must be >= 1");
        try {
            result = best_of_restarts(m, k, options.restarts, options.seed);
        } catch (const std::invalid_argument& e) {
            throw StageError(std::string("cluster: ") + e.what());
        }
    }
    outcome.k = result.k;
    outcome.zero_docs = result.zero_docs.size();
    outcome.iterations = result.iterations;

    std::string clusters_csv = "id,cluster\n";
    for (std::size_t d = 0; d < m.n_docs(); ++d) {
        clusters_csv += m.doc_ids[d];
        clusters_csv += ',';
        clusters_csv += std::to_string(result.assignments[d]);
        clusters_csv += '\n';
    }
    emit("clusters.csv", clusters_csv);

    const std::vector<std::size_t> sizes = cluster_sizes(result);
    std::string sizes_csv = "cluster,count\n";
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        sizes_csv += std::to_string(c);
        sizes_csv += ',';
        sizes_csv += std::to_string(sizes[c]);
        sizes_csv += '\n';
    }
    emit("sizes.csv", sizes_csv);

    // Size-ordered view of the same counts, largest first.
    std::vector<std::size_t> order(sizes.size());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
        return a < b;
    });
    std::string sorted_csv = "cluster,count\n";
    for (std::size_t c : order) {
        sorted_csv += std::to_string(c);
        sorted_csv += ',';
        sorted_csv += std::to_string(sizes[c]);
        sorted_csv += '\n';
    }
    emit("sizes_sorted.csv", sorted_csv);

    std::vector<TagCloud> clouds;
    clouds.reserve(result.k);
    for (std::size_t c = 0; c < result.k; ++c) {
        clouds.push_back(tag_cloud(m, result, c, options.top_n));
    }
    if (subtract && result.k >= 2) {
        clouds = subtract_common_terms(clouds, commonality);
    }
    for (std::size_t c = 0; c < clouds.size(); ++c) {
        const std::string name = "tagcloud_" + std::to_string(c) + ".json";
        emit(name, tag_cloud_to_json(clouds[c]));
    }
    return outcome;
}

// --- summary ---

namespace {

// Splits a small CSV with a header line into rows of cells.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    const std::vector<std::string> lines = split(read_file(path), '\n');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        rows.push_back(split(lines[i], ','));
    }
    return rows;
}

void append_kv_line(std::string& text, const std::string& name,
                    const std::string& value) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "  %-22s%10s\n", name.c_str(),
                  value.c_str());
    text += buf;
}

}  // namespace

Summary emit_summary(const std::string& dir) {
    ordered_json summary;
    std::string text;
    bool any = false;

    const std::string completeness_path = dir + "/completeness.json";
    if (fs::is_regular_file(completeness_path)) {
        any = true;
        const auto j = ordered_json::parse(read_file(completeness_path));
        summary["completeness"] = j;
        text += "Profile completeness\n";
        for (const auto& name : profile_field_names()) {
            append_kv_line(
                text, name,
                std::to_string(j.value(name, std::uint64_t{0})));
        }
        append_kv_line(text, "total",
                       std::to_string(j.value("total", std::uint64_t{0})));
        text += "\n";
    }

    const std::string dist_path = dir + "/dist.json";
    if (fs::is_regular_file(dist_path)) {
        any = true;
        const auto j = ordered_json::parse(read_file(dist_path));
        summary["level_distribution"] = j;
        text += "Education levels\n";
        for (EducationLevel level : kAllLevels) {
            append_kv_line(
                text, level_name(level),
                std::to_string(j.value(level_name(level), std::uint64_t{0})));
        }
        append_kv_line(text, "total",
                       std::to_string(j.value("total", std::uint64_t{0})));
        text += "\n";
    }

    const std::string sizes_path = dir + "/sizes.csv";
    if (fs::is_regular_file(sizes_path)) {
        any = true;
        const auto size_rows = read_csv_rows(sizes_path);
        ordered_json clustering;
        clustering["k"] = size_rows.size();
        auto sizes = ordered_json::array();
        std::uint64_t assigned = 0;
        for (const auto& row : size_rows) {
            ordered_json e;
            e["cluster"] = parse_u64_value(row.at(0), "sizes.csv cluster");
            e["count"] = parse_u64_value(row.at(1), "sizes.csv count");
            assigned += e["count"].get<std::uint64_t>();
            sizes.push_back(std::move(e));
        }
        clustering["sizes"] = std::move(sizes);
        clustering["assigned_docs"] = assigned;
        const std::string elbow_path = dir + "/elbow.csv";
        if (fs::is_regular_file(elbow_path)) {
            auto curve = ordered_json::array();
            for (const auto& row : read_csv_rows(elbow_path)) {
                ordered_json e;
                e["k"] = parse_u64_value(row.at(0), "elbow.csv k");
                e["wcss"] = std::stod(row.at(1));
                curve.push_back(std::move(e));
            }
            clustering["elbow_curve"] = std::move(curve);
        }
        summary["clustering"] = std::move(clustering);
        text += "Clustering\n";
        append_kv_line(text, "clusters", std::to_string(size_rows.size()));
        for (const auto& row : size_rows) {
            append_kv_line(text, "cluster " + row.at(0), row.at(1));
        }
        text += "\n";
    }

    auto clouds = ordered_json::array();
    std::string cloud_text;
    for (std::size_t c = 0;; ++c) {
        const std::string path =
            dir + "/tagcloud_" + std::to_string(c) + ".json";
        if (!fs::is_regular_file(path)) break;
        const auto j = ordered_json::parse(read_file(path));
        ordered_json entry;
        entry["cluster"] = c;
        auto terms = ordered_json::array();
        cloud_text += "  cluster " + std::to_string(c) + ":";
        std::size_t shown = 0;
        for (const auto& t : j.at("terms")) {
            if (shown == 10) break;
            terms.push_back(t);
            cloud_text += " " + t.at("term").get<std::string>();
            ++shown;
        }
        if (shown == 0) cloud_text += " (empty)";
        cloud_text += "\n";
        entry["terms"] = std::move(terms);
        clouds.push_back(std::move(entry));
    }
    if (!clouds.empty()) {
        any = true;
        summary["tag_clouds"] = std::move(clouds);
        text += "Tag clouds (top 10 terms)\n";
        text += cloud_text;
        text += "\n";
    }

    if (!any) {
        throw StageError("report: no artifacts found in " + dir);
    }

    Summary out;
    out.json_text = summary.dump(2) + "\n";
    out.plain_text = text;
    write_file(dir + "/summary.json", out.json_text);
    write_file(dir + "/summary.txt", out.plain_text);
    return out;
}

}  // namespace linkmine
