#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linkmine/crawl.hpp"
#include "linkmine/textpipe.hpp"

namespace linkmine {

// Sectioned key-value config ("[section]" headers, "key = value" lines,
// '#'/';' comments).  Keys are addressed as "section.key"; keys before any
// section header live in the "run" section.  Duplicate keys and malformed
// lines are configuration errors, with line numbers.
class RunConfig {
public:
    static RunConfig parse(const std::string& text, const std::string& origin);
    static RunConfig parse_file(const std::string& path);

    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, std::string fallback) const;
    // Throw ConfigError naming the key when it is absent or malformed.
    const std::string& require(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;

    // CLI overrides (--seed, --out-dir) and injected defaults.
    void set(const std::string& key, std::string value);
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::map<std::string, std::string>& entries() const {
        return entries_;
    }

private:
    std::map<std::string, std::string> entries_;
};

enum class Stage { Crawl, Filter, Classify, Dtm, Cluster, Report };

const char* stage_name(Stage s);

// Parses a comma-separated stage list.  The list must be a non-empty
// subset of crawl,filter,classify,dtm,cluster,report in that order;
// anything else is a configuration error.
std::vector<Stage> parse_stages(const std::string& csv);

// Builds the crawler configuration from the [crawl] section, loading the
// selector-rule file and checking the leaf rule; throws ConfigError on
// missing or inconsistent keys.
CrawlConfig crawl_config_from(const RunConfig& config);

struct StageRecord {
    std::string name;
    std::map<std::string, std::string> params;
    std::map<std::string, std::uint64_t> counts;
    // Artifact file name -> FNV-1a 64 digest of its bytes.
    std::map<std::string, std::string> digests;
    double duration_seconds = 0.0;
};

struct RunReport {
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<StageRecord> stages;
    std::string failed_stage;  // empty on success
    std::string error;

    std::string to_json_text() const;
};

// Executes the stages in order against `config`.  Stages communicate only
// through files in out_dir; a stage's input is either the artifact an
// earlier stage of this run produced or an explicit "<stage>.in"-style
// path from the config.  A missing input is a stage error naming the gap.
// run_report.json is written to out_dir on both success and failure (the
// report's duration fields are wall-clock and sit outside the
// byte-determinism contract; every other artifact is reproducible
// byte-for-byte from config + inputs + seed).
RunReport run_pipeline(const RunConfig& config,
                       const std::vector<Stage>& stages);

struct ClusterStageOptions {
    std::string k = "auto";  // "auto" for elbow selection, else an integer
    std::size_t k_max = 50;  // elbow scan upper bound (capped by doc count)
    std::size_t restarts = 5;
    std::size_t top_n = 50;  // tag cloud size
    std::string commonality = "0.8";  // "off" disables common-term removal
    std::uint64_t seed = 0;
};

struct ClusterStageOutcome {
    std::size_t k = 0;
    std::size_t docs = 0;
    std::size_t zero_docs = 0;
    std::size_t iterations = 0;
    bool elbow_degenerate = false;
    // File names written under out_dir, in write order.
    std::vector<std::string> artifacts;
};

// Clusters a loaded DTM and writes clusters.csv, sizes.csv,
// sizes_sorted.csv, tagcloud_<c>.json and (for k=auto) elbow.csv into
// out_dir.  Common-term subtraction is skipped for a single cluster.
ClusterStageOutcome run_cluster_stage(const SparseDtm& m,
                                      const ClusterStageOptions& options,
                                      const std::string& out_dir);

struct Summary {
    std::string json_text;
    std::string plain_text;
};

// Builds summary.json and summary.txt from whichever artifacts exist in
// `dir` (completeness.json, dist.json, sizes.csv/elbow.csv, tag clouds),
// in that fixed section order.  No artifacts at all is a stage error.
Summary emit_summary(const std::string& dir);

}  // namespace linkmine
