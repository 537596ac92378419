#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "linkmine/classify.hpp"
#include "linkmine/cluster.hpp"
#include "linkmine/crawl.hpp"
#include "linkmine/pipeline.hpp"
#include "linkmine/profile.hpp"
#include "linkmine/stopwords.hpp"
#include "linkmine/textpipe.hpp"
#include "linkmine/util.hpp"

#ifndef LINKMINE_DATA_DIR
#define LINKMINE_DATA_DIR "data"
#endif

namespace {

using namespace linkmine;

const std::string kDefaultKeywords =
    std::string(LINKMINE_DATA_DIR) + "/keywords_isced.json";
const std::string kDefaultStopwords =
    std::string(LINKMINE_DATA_DIR) + "/stopwords_en.txt";

void cmd_crawl(const RunConfig& base, const std::string& out) {
    RunConfig cfg = base;
    const CrawlConfig cc = crawl_config_from(cfg);
    const auto fixture = cfg.get("crawl.fixture_dir");
    const bool live = cfg.get_or("crawl.live", "false") == "true";
    if (fixture.has_value() == live) {
        throw ConfigError(
            "crawl: set exactly one of --fixture-dir and --live");
    }
    if (fixture && !std::filesystem::is_directory(*fixture)) {
        throw ConfigError("crawl: directory not found: " + *fixture);
    }
    std::unique_ptr<Fetcher> fetcher;
    if (fixture) {
        fetcher = std::make_unique<FixtureFetcher>(*fixture);
    } else {
        fetcher = std::make_unique<HttpFetcher>();
    }
    const std::uint64_t seed = cfg.get_u64("run.seed", 0);
    IdGenerator ids(cfg.get_or("crawl.id_prefix", "profile"));
    Dataset ds;
    ds.provenance = "crawl " + cc.seed_url;
    const CrawlStats stats = crawl(
        cc, *fetcher, [&](RawProfile raw) { ds.append(anonymize(raw, ids)); },
        seed, [](const std::string& msg) { std::cerr << msg << "\n"; });
    write_profiles_jsonl(ds, out);
    std::cout << "crawl: " << stats.pages_fetched << " pages fetched, "
              << stats.fetch_errors << " fetch errors, " << ds.profiles.size()
              << " profiles -> " << out << "\n";
}

void cmd_filter(const std::string& in, const std::string& stopwords_path,
                double ratio, const std::string& out,
                const std::string& completeness_out) {
    const Dataset ds = read_profiles_jsonl(in);
    const Dataset with_content = filter_min_content(ds);
    const StopwordList stopwords = load_stopwords(stopwords_path);
    const Dataset kept = filter_english(with_content, stopwords, ratio);
    write_profiles_jsonl(kept, out);
    if (!completeness_out.empty()) {
        write_file(completeness_out,
                   completeness_report(kept).to_json() + "\n");
    }
    std::cout << "filter: " << ds.profiles.size() << " in, "
              << with_content.profiles.size() << " after min-content, "
              << kept.profiles.size() << " kept -> " << out << "\n";
}

void cmd_classify(const std::string& in, const std::string& keywords_path,
                  const std::string& out, const std::string& dist_out,
                  const std::string& subset_level,
                  const std::string& subset_out) {
    const Dataset ds = read_profiles_jsonl(in);
    const KeywordTable kw = KeywordTable::load(keywords_path);
    std::string csv = "id,level\n";
    for (const Profile& p : ds.profiles) {
        csv += p.id;
        csv += ',';
        csv += level_name(classify_profile(p, kw));
        csv += '\n';
    }
    write_file(out, csv);
    write_file(dist_out, level_distribution(ds, kw).to_json() + "\n");
    if (!subset_level.empty()) {
        if (subset_out.empty()) {
            throw ConfigError("classify: --subset-level needs --subset-out");
        }
        const Dataset subset =
            subset_by_level(ds, level_from_name(subset_level), kw);
        write_profiles_jsonl(subset, subset_out);
        std::cout << "classify: " << subset.profiles.size() << " "
                  << subset_level << " profiles -> " << subset_out << "\n";
    }
    std::cout << "classify: " << ds.profiles.size() << " profiles -> " << out
              << "\n";
}

void cmd_dtm(const std::string& in, const std::string& fields_csv,
             std::size_t min_term_len, std::int64_t threshold,
             const std::string& weighting, const std::string& stopwords_path,
             const std::string& out) {
    if (weighting != "raw" && weighting != "tfidf") {
        throw ConfigError("dtm: --weighting must be raw or tfidf");
    }
    const Dataset ds = read_profiles_jsonl(in);
    const Corpus corpus = build_corpus(ds, parse_corpus_fields(fields_csv));
    PipelineConfig pc;
    pc.stopwords = load_stopwords(stopwords_path);
    pc.min_term_length = min_term_len;
    pc.frequency_threshold = threshold;
    SparseDtm m = build_dtm(corpus, pc);
    m = filter_low_frequency(m, threshold);
    if (weighting == "tfidf") m = tfidf_weight(m);
    save_dtm(m, out);
    std::cout << "dtm: " << m.n_docs() << " docs, " << m.vocab.size()
              << " terms, " << m.nonzeros() << " nonzeros -> " << out << "\n";
}

void cmd_cluster(const std::string& dtm_dir,
                 const ClusterStageOptions& options,
                 const std::string& out_dir) {
    const SparseDtm m = load_dtm(dtm_dir);
    const ClusterStageOutcome outcome = run_cluster_stage(m, options, out_dir);
    std::cout << "cluster: k=" << outcome.k << " over " << outcome.docs
              << " docs (" << outcome.zero_docs << " all-zero) -> " << out_dir
              << "\n";
    if (options.k == "auto" && outcome.elbow_degenerate) {
        std::cerr << "cluster: warning: flat elbow curve, chosen k is a "
                     "low-confidence fallback\n";
    }
}

void cmd_report(const std::string& dir) {
    const Summary summary = emit_summary(dir);
    std::cout << summary.plain_text;
}

void cmd_run(RunConfig cfg, const std::string& stages_csv) {
    if (!cfg.has("filter.stopwords")) {
        cfg.set("filter.stopwords", kDefaultStopwords);
    }
    if (!cfg.has("dtm.stopwords")) cfg.set("dtm.stopwords", kDefaultStopwords);
    if (!cfg.has("classify.keywords")) {
        cfg.set("classify.keywords", kDefaultKeywords);
    }
    std::string stages = stages_csv;
    if (stages.empty()) stages = cfg.get_or("run.stages", "");
    if (stages.empty()) {
        throw ConfigError("run: set run.stages in the config or pass --stages");
    }
    const RunReport report = run_pipeline(cfg, parse_stages(stages));
    for (const StageRecord& rec : report.stages) {
        std::cout << "stage " << rec.name << ":";
        for (const auto& [key, value] : rec.counts) {
            std::cout << " " << key << "=" << value;
        }
        std::cout << "\n";
    }
    std::cout << "run report -> " << report.out_dir << "/run_report.json\n";
}

int run_guarded(const std::function<void()>& fn) {
    try {
        fn();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const StageError& e) {
        std::cerr << "stage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linkmine: directory profile collection, classification "
                 "and clustering"};
    app.require_subcommand(1);

    // crawl
    auto* crawl_cmd =
        app.add_subcommand("crawl", "Collect profiles from a directory tree");
    std::string crawl_config;
    std::string crawl_fixture;
    bool crawl_live = false;
    std::size_t crawl_max_pages = 0;
    double crawl_randomness = 0.0;
    std::uint64_t crawl_seed = 0;
    std::string crawl_out = "profiles.jsonl";
    crawl_cmd->add_option("--config", crawl_config, "Run config file")
        ->required();
    crawl_cmd->add_option("--fixture-dir", crawl_fixture,
                          "Serve pages from this directory");
    crawl_cmd->add_flag("--live", crawl_live, "Fetch over HTTP");
    crawl_cmd->add_option("--max-pages", crawl_max_pages, "Fetch budget");
    crawl_cmd->add_option("--randomness", crawl_randomness,
                          "Frontier randomness in [0,1]");
    crawl_cmd->add_option("--seed", crawl_seed, "Deterministic seed");
    crawl_cmd->add_option("--out", crawl_out, "Output profile JSON-lines");

    // filter
    auto* filter_cmd =
        app.add_subcommand("filter", "Drop incomplete and non-English profiles");
    std::string filter_in;
    std::string filter_stopwords = kDefaultStopwords;
    double filter_ratio = 0.2;
    std::string filter_out = "filtered.jsonl";
    std::string filter_completeness;
    filter_cmd->add_option("--in", filter_in, "Input profile JSON-lines")
        ->required();
    filter_cmd->add_option("--stopwords", filter_stopwords,
                           "English stop-word list");
    filter_cmd->add_option("--ratio", filter_ratio,
                           "Minimum English stop-word ratio");
    filter_cmd->add_option("--out", filter_out, "Output profile JSON-lines");
    filter_cmd->add_option("--completeness", filter_completeness,
                           "Also write a completeness report here");

    // classify
    auto* classify_cmd =
        app.add_subcommand("classify", "Assign ISCED education levels");
    std::string classify_in;
    std::string classify_keywords = kDefaultKeywords;
    std::string classify_out = "levels.csv";
    std::string classify_dist = "dist.json";
    std::string classify_subset_level;
    std::string classify_subset_out;
    classify_cmd->add_option("--in", classify_in, "Input profile JSON-lines")
        ->required();
    classify_cmd->add_option("--keywords", classify_keywords,
                             "Keyword table JSON");
    classify_cmd->add_option("--out", classify_out, "Per-profile level CSV");
    classify_cmd->add_option("--distribution", classify_dist,
                             "Level distribution JSON");
    classify_cmd->add_option("--subset-level", classify_subset_level,
                             "Also write profiles of this level");
    classify_cmd->add_option("--subset-out", classify_subset_out,
                             "Subset output JSON-lines");

    // dtm
    auto* dtm_cmd =
        app.add_subcommand("dtm", "Build the document-term matrix");
    std::string dtm_in;
    std::string dtm_fields = "positions,summary";
    std::size_t dtm_min_term_len = 5;
    std::int64_t dtm_threshold = 50;
    std::string dtm_weighting = "tfidf";
    std::string dtm_stopwords = kDefaultStopwords;
    std::string dtm_out = "dtm";
    dtm_cmd->add_option("--in", dtm_in, "Input profile JSON-lines")
        ->required();
    dtm_cmd->add_option("--fields", dtm_fields,
                        "Comma-separated: positions,summary");
    dtm_cmd->add_option("--min-term-len", dtm_min_term_len,
                        "Minimum term length in characters");
    dtm_cmd->add_option("--threshold", dtm_threshold,
                        "Column-sum frequency threshold");
    dtm_cmd->add_option("--weighting", dtm_weighting, "raw or tfidf");
    dtm_cmd->add_option("--stopwords", dtm_stopwords, "Stop-word list");
    dtm_cmd->add_option("--out", dtm_out, "Output DTM directory");

    // cluster
    auto* cluster_cmd =
        app.add_subcommand("cluster", "K-means clustering with elbow search");
    std::string cluster_dtm;
    ClusterStageOptions cluster_options;
    std::string cluster_out = "clusters";
    cluster_cmd->add_option("--dtm", cluster_dtm, "Input DTM directory")
        ->required();
    cluster_cmd->add_option("--k", cluster_options.k,
                            "Cluster count, or auto for elbow selection");
    cluster_cmd->add_option("--k-max", cluster_options.k_max,
                            "Elbow scan upper bound");
    cluster_cmd->add_option("--restarts", cluster_options.restarts,
                            "Restarts per k");
    cluster_cmd->add_option("--seed", cluster_options.seed,
                            "Deterministic seed");
    cluster_cmd->add_option("--top-n", cluster_options.top_n,
                            "Tag cloud size");
    cluster_cmd->add_option("--commonality", cluster_options.commonality,
                            "Common-term fraction, or off");
    cluster_cmd->add_option("--out", cluster_out, "Output directory");

    // report
    auto* report_cmd =
        app.add_subcommand("report", "Summarize the artifacts of a run");
    std::string report_dir;
    report_cmd->add_option("--dir", report_dir, "Artifact directory")
        ->required();

    // run
    auto* run_cmd =
        app.add_subcommand("run", "Execute pipeline stages from a config");
    std::string run_config;
    std::string run_stages;
    std::uint64_t run_seed = 0;
    std::string run_out_dir;
    run_cmd->add_option("--config", run_config, "Run config file")->required();
    run_cmd->add_option("--stages", run_stages,
                        "Comma-separated stage list (overrides run.stages)");
    run_cmd->add_option("--seed", run_seed, "Override run.seed");
    run_cmd->add_option("--out-dir", run_out_dir, "Override run.out_dir");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (crawl_cmd->parsed()) {
        return run_guarded([&] {
            RunConfig cfg = RunConfig::parse_file(crawl_config);
            if (!crawl_fixture.empty()) {
                cfg.set("crawl.fixture_dir", crawl_fixture);
            }
            if (crawl_live) cfg.set("crawl.live", "true");
            if (crawl_cmd->count("--max-pages")) {
                cfg.set("crawl.max_pages", std::to_string(crawl_max_pages));
            }
            if (crawl_cmd->count("--randomness")) {
                cfg.set("crawl.randomness", format_double(crawl_randomness));
            }
            if (crawl_cmd->count("--seed")) {
                cfg.set("run.seed", std::to_string(crawl_seed));
            }
            cmd_crawl(cfg, crawl_out);
        });
    }
    if (filter_cmd->parsed()) {
        return run_guarded([&] {
            cmd_filter(filter_in, filter_stopwords, filter_ratio, filter_out,
                       filter_completeness);
        });
    }
    if (classify_cmd->parsed()) {
        return run_guarded([&] {
            cmd_classify(classify_in, classify_keywords, classify_out,
                         classify_dist, classify_subset_level,
                         classify_subset_out);
        });
    }
    if (dtm_cmd->parsed()) {
        return run_guarded([&] {
            cmd_dtm(dtm_in, dtm_fields, dtm_min_term_len, dtm_threshold,
                    dtm_weighting, dtm_stopwords, dtm_out);
        });
    }
    if (cluster_cmd->parsed()) {
        return run_guarded(
            [&] { cmd_cluster(cluster_dtm, cluster_options, cluster_out); });
    }
    if (report_cmd->parsed()) {
        return run_guarded([&] { cmd_report(report_dir); });
    }
    if (run_cmd->parsed()) {
        return run_guarded([&] {
            RunConfig cfg = RunConfig::parse_file(run_config);
            if (run_cmd->count("--seed")) {
                cfg.set("run.seed", std::to_string(run_seed));
            }
            if (!run_out_dir.empty()) cfg.set("run.out_dir", run_out_dir);
            cmd_run(std::move(cfg), run_stages);
        });
    }
    return 1;
}
