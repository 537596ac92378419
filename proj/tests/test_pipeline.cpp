#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "linkmine/pipeline.hpp"
#include "linkmine/synth.hpp"
#include "linkmine/util.hpp"
#include "support/temp_dir.hpp"

using namespace linkmine;

namespace {

std::string data_path(const std::string& name) {
    return std::string(LINKMINE_DATA_DIR) + "/" + name;
}

RunConfig base_config(const std::string& out_dir) {
    RunConfig cfg = RunConfig::parse("", "test config");
    cfg.set("run.seed", "7");
    cfg.set("run.out_dir", out_dir);
    cfg.set("filter.stopwords", data_path("stopwords_en.txt"));
    cfg.set("classify.keywords", data_path("keywords_isced.json"));
    cfg.set("dtm.stopwords", data_path("stopwords_en.txt"));
    return cfg;
}

std::string small_corpus(const testing::ScopedTempDir& dir, std::size_t count,
                         std::uint64_t seed) {
    SynthConfig sc;
    sc.count = count;
    sc.seed = seed;
    const std::string path = dir.file("corpus.jsonl");
    write_profiles_jsonl(generate_corpus(sc), path);
    return path;
}

std::size_t line_count(const std::string& path) {
    const std::string text = read_file(path);
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

// Mirrors the documented summary layout: two leading spaces, the name
// left-justified to 22 columns, the value right-justified to 10.
std::string kv(const std::string& name, const std::string& value) {
    std::string line = "  " + name;
    if (name.size() < 22) line += std::string(22 - name.size(), ' ');
    if (value.size() < 10) line += std::string(10 - value.size(), ' ');
    return line + value + "\n";
}

}  // namespace

TEST_CASE("run config parses sections, comments and value whitespace") {
    const RunConfig cfg = RunConfig::parse(
        "# leading comment\n"
        "seed = 5\n"
        "\n"
        "[filter]\n"
        "; semicolon comment\n"
        "english_ratio = 0.25\n"
        "label = two  words  \n",
        "inline");
    CHECK(cfg.get("run.seed") == "5");
    CHECK(cfg.get("filter.english_ratio") == "0.25");
    CHECK(cfg.get("filter.label") == "two  words");
    CHECK_FALSE(cfg.get("filter.absent").has_value());
    CHECK(cfg.get_or("filter.absent", "dflt") == "dflt");
    CHECK(cfg.get_u64("run.seed", 0) == 5);
    CHECK(cfg.get_double("filter.english_ratio", 0.0) == doctest::Approx(0.25));
    CHECK(cfg.has("run.seed"));
    CHECK_FALSE(cfg.has("run.out_dir"));
}

TEST_CASE("run config rejects duplicates and malformed lines") {
    try {
        RunConfig::parse("x = 1\nx = 2\n", "cfg.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("cfg.ini") != std::string::npos);
        CHECK(what.find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(RunConfig::parse("no equals sign\n", "c"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[unclosed\n", "c"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse(" = value\n", "c"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_file("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("run config require and typed getters name the key") {
    RunConfig cfg = RunConfig::parse("n = abc\n", "c");
    try {
        cfg.require("run.missing");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.missing") != std::string::npos);
    }
    try {
        cfg.get_u64("run.n", 0);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.n") != std::string::npos);
    }
    CHECK_THROWS_AS(cfg.get_double("run.n", 0.0), ConfigError);

    cfg.set("run.n", "42");  // overrides are allowed
    CHECK(cfg.get_u64("run.n", 0) == 42);
}

TEST_CASE("parse_stages enforces the canonical order") {
    CHECK(parse_stages("filter,classify") ==
          std::vector<Stage>{Stage::Filter, Stage::Classify});
    CHECK(parse_stages(" filter , classify ") ==
          std::vector<Stage>{Stage::Filter, Stage::Classify});
    CHECK(parse_stages("crawl,filter,classify,dtm,cluster,report").size() == 6);
    CHECK(parse_stages("report") == std::vector<Stage>{Stage::Report});

    CHECK_THROWS_AS(parse_stages(""), ConfigError);
    CHECK_THROWS_AS(parse_stages("classify,filter"), ConfigError);
    CHECK_THROWS_AS(parse_stages("filter,filter"), ConfigError);
    CHECK_THROWS_AS(parse_stages("filter,bogus"), ConfigError);
}

TEST_CASE("stage names round-trip through parse_stages") {
    for (Stage s : {Stage::Crawl, Stage::Filter, Stage::Classify, Stage::Dtm,
                    Stage::Cluster, Stage::Report}) {
        const auto parsed = parse_stages(stage_name(s));
        REQUIRE(parsed.size() == 1);
        CHECK(parsed[0] == s);
    }
}

TEST_CASE("run_pipeline rejects empty or misordered stage lists") {
    testing::ScopedTempDir dir("pipe");
    const RunConfig cfg = base_config(dir.file("out"));
    CHECK_THROWS_AS(run_pipeline(cfg, {}), ConfigError);
    CHECK_THROWS_AS(run_pipeline(cfg, {Stage::Classify, Stage::Filter}),
                    ConfigError);
    CHECK_THROWS_AS(run_pipeline(cfg, {Stage::Filter, Stage::Filter}),
                    ConfigError);
}

TEST_CASE("run_pipeline validates every stage before running any") {
    testing::ScopedTempDir dir("pipe");
    RunConfig cfg = base_config(dir.file("out"));
    cfg.set("filter.in", small_corpus(dir, 20, 3));
    cfg.set("classify.keywords", dir.file("absent.json"));
    // The filter stage could run, but classify validation fails first.
    CHECK_THROWS_AS(run_pipeline(cfg, {Stage::Filter, Stage::Classify}),
                    ConfigError);
    CHECK_FALSE(std::filesystem::exists(dir.file("out/filtered.jsonl")));
}

TEST_CASE("stages hand artifacts forward within one run") {
    testing::ScopedTempDir dir("pipe");
    const std::string corpus = small_corpus(dir, 80, 11);
    const std::string out = dir.file("out");

    RunConfig cfg = base_config(out);
    cfg.set("filter.in", corpus);
    const RunReport report =
        run_pipeline(cfg, {Stage::Filter, Stage::Classify});

    REQUIRE(report.stages.size() == 2);
    CHECK(report.stages[0].name == "filter");
    CHECK(report.stages[1].name == "classify");
    CHECK(report.failed_stage.empty());
    CHECK(report.seed == 7);

    // Artifacts landed in out_dir; levels.csv covers exactly the survivors.
    const std::size_t survivors = line_count(out + "/filtered.jsonl");
    CHECK(survivors > 0);
    CHECK(line_count(out + "/levels.csv") == survivors + 1);  // header row

    // The report carries digests of what it wrote.
    CHECK(report.stages[0].digests.count("filtered.jsonl") == 1);
    CHECK(report.stages[0].digests.count("completeness.json") == 1);
    CHECK(report.stages[1].digests.count("levels.csv") == 1);
    CHECK(report.stages[1].digests.count("dist.json") == 1);
    CHECK(report.stages[0].digests.at("filtered.jsonl") ==
          fnv1a64_hex(read_file(out + "/filtered.jsonl")));

    // Parameters echo the effective configuration.
    CHECK(report.stages[0].params.at("stopwords") ==
          data_path("stopwords_en.txt"));
    CHECK(report.stages[1].params.at("keywords") ==
          data_path("keywords_isced.json"));

    // run_report.json mirrors the returned report.
    const auto j = nlohmann::json::parse(read_file(out + "/run_report.json"));
    CHECK(j.at("seed") == 7);
    CHECK(j.at("stages").size() == 2);
    CHECK(j.at("stages")[0].at("name") == "filter");
    CHECK(j.at("stages")[0].at("digests").at("filtered.jsonl") ==
          report.stages[0].digests.at("filtered.jsonl"));
    CHECK_FALSE(j.contains("failed_stage"));
}

TEST_CASE("split runs with explicit inputs match a single run byte for byte") {
    testing::ScopedTempDir dir("pipe");
    const std::string corpus = small_corpus(dir, 80, 11);

    RunConfig joint = base_config(dir.file("joint"));
    joint.set("filter.in", corpus);
    run_pipeline(joint, {Stage::Filter, Stage::Classify});

    RunConfig first = base_config(dir.file("first"));
    first.set("filter.in", corpus);
    run_pipeline(first, {Stage::Filter});

    RunConfig second = base_config(dir.file("second"));
    second.set("classify.in", dir.file("first/filtered.jsonl"));
    run_pipeline(second, {Stage::Classify});

    CHECK(read_file(dir.file("joint/filtered.jsonl")) ==
          read_file(dir.file("first/filtered.jsonl")));
    CHECK(read_file(dir.file("joint/levels.csv")) ==
          read_file(dir.file("second/levels.csv")));
    CHECK(read_file(dir.file("joint/dist.json")) ==
          read_file(dir.file("second/dist.json")));
}

TEST_CASE("a stage without its input fails naming the gap") {
    testing::ScopedTempDir dir("pipe");
    const std::string out = dir.file("out");
    const RunConfig cfg = base_config(out);
    try {
        run_pipeline(cfg, {Stage::Classify});
        FAIL("expected StageError");
    } catch (const StageError& e) {
        const std::string what = e.what();
        CHECK(what.find("filtered.jsonl") != std::string::npos);
        CHECK(what.find("classify.in") != std::string::npos);
    }

    // The failure is still reported in run_report.json.
    const auto j = nlohmann::json::parse(read_file(out + "/run_report.json"));
    CHECK(j.at("failed_stage") == "classify");
    CHECK_FALSE(j.at("error").get<std::string>().empty());
}

TEST_CASE("stale artifacts from other runs are not picked up") {
    testing::ScopedTempDir dir("pipe");
    const std::string out = dir.file("out");

    RunConfig first = base_config(out);
    first.set("filter.in", small_corpus(dir, 20, 3));
    run_pipeline(first, {Stage::Filter});
    REQUIRE(std::filesystem::exists(out + "/filtered.jsonl"));

    // A later classify-only run must not silently reuse the old file.
    const RunConfig second = base_config(out);
    CHECK_THROWS_AS(run_pipeline(second, {Stage::Classify}), StageError);
}

TEST_CASE("full pipeline reruns are byte-identical") {
    testing::ScopedTempDir dir("pipe");
    const std::string corpus = small_corpus(dir, 150, 5);

    auto run_into = [&](const std::string& out) {
        RunConfig cfg = base_config(out);
        cfg.set("filter.in", corpus);
        cfg.set("dtm.threshold", "10");
        cfg.set("cluster.k", "3");
        cfg.set("cluster.restarts", "3");
        cfg.set("cluster.top_n", "8");
        run_pipeline(cfg, {Stage::Filter, Stage::Classify, Stage::Dtm,
                           Stage::Cluster, Stage::Report});
        return out;
    };
    const std::string a = run_into(dir.file("a"));
    const std::string b = run_into(dir.file("b"));

    for (const std::string name :
         {"filtered.jsonl", "completeness.json", "levels.csv", "dist.json",
          "dtm/header.json", "dtm/entries.csv", "clusters.csv", "sizes.csv",
          "sizes_sorted.csv", "tagcloud_0.json", "tagcloud_1.json",
          "tagcloud_2.json", "summary.json", "summary.txt"}) {
        REQUIRE_MESSAGE(std::filesystem::exists(a + "/" + name), name);
        CHECK_MESSAGE(read_file(a + "/" + name) == read_file(b + "/" + name),
                      "artifact differs: ", name);
    }

    // Cluster sizes add up to the clustered documents.
    std::size_t size_sum = 0;
    const std::string sizes = read_file(a + "/sizes.csv");
    for (const std::string& line : split(sizes, '\n')) {
        if (line.empty() || line.starts_with("cluster")) continue;
        size_sum += std::stoul(line.substr(line.find(',') + 1));
    }
    CHECK(size_sum == line_count(a + "/clusters.csv") - 1);
}

TEST_CASE("the bundled synthetic corpus matches its generator") {
    testing::ScopedTempDir dir("synth");
    const std::string regen = dir.file("regen.jsonl");
    write_profiles_jsonl(generate_corpus(SynthConfig{}), regen);
    CHECK(fnv1a64_hex(read_file(regen)) ==
          fnv1a64_hex(read_file(data_path("synthetic_corpus.jsonl"))));
}

TEST_CASE("synth config validation") {
    SynthConfig sc;
    CHECK_NOTHROW(sc.validate());
    sc.count = 0;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc = SynthConfig{};
    sc.incomplete_rate = -0.1;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc = SynthConfig{};
    sc.foreign_rate = 0.7;
    sc.incomplete_rate = 0.5;  // rates sum above 1
    CHECK_THROWS_AS(sc.validate(), ConfigError);
}

TEST_CASE("crawl_config_from maps the crawl section") {
    RunConfig cfg = RunConfig::parse("", "c");
    cfg.set("crawl.seed_url", "http://directory.test/");
    cfg.set("crawl.selectors", data_path("selectors_default.json"));
    cfg.set("crawl.leaf_url_regex", "/pub/profile-[0-9]+$");
    cfg.set("crawl.randomness", "0.25");
    cfg.set("crawl.max_pages", "123");
    cfg.set("crawl.politeness_ms", "5");

    const CrawlConfig cc = crawl_config_from(cfg);
    CHECK(cc.seed_url == "http://directory.test/");
    CHECK(cc.randomness == doctest::Approx(0.25));
    CHECK(cc.max_pages == 123);
    CHECK(cc.politeness_delay.count() == 5);
    CHECK(cc.selector_rules.size() == 7);
    CHECK(cc.leaf_pattern.kind == LeafRule::Kind::UrlRegex);

    // Exactly one leaf rule kind must be configured.
    cfg.set("crawl.leaf_content_regex", "member-name");
    CHECK_THROWS_AS(crawl_config_from(cfg), ConfigError);

    RunConfig none = RunConfig::parse("", "c");
    none.set("crawl.seed_url", "http://directory.test/");
    none.set("crawl.selectors", data_path("selectors_default.json"));
    CHECK_THROWS_AS(crawl_config_from(none), ConfigError);

    RunConfig bad_file = RunConfig::parse("", "c");
    bad_file.set("crawl.seed_url", "http://directory.test/");
    bad_file.set("crawl.selectors", "/nonexistent/rules.json");
    bad_file.set("crawl.leaf_url_regex", "x");
    CHECK_THROWS_AS(crawl_config_from(bad_file), ConfigError);
}

TEST_CASE("summary formatting golden") {
    testing::ScopedTempDir dir("summary");
    write_file(dir.file("completeness.json"),
               R"({"positions_overview":10,"summary_description":8,)"
               R"("education_degree1":9,"education_degree2":4,)"
               R"("education_degree3":2,"total":10})");
    write_file(dir.file("dist.json"),
               R"({"PhD":1,"Master":2,"Bachelor":3,"Secondary":1,)"
               R"("Other":3,"total":10})");
    write_file(dir.file("sizes.csv"), "cluster,count\n0,6\n1,4\n");
    write_file(dir.file("elbow.csv"), "k,wcss\n1,100\n2,40\n3,35\n");
    std::string cloud0 = R"({"cluster":0,"terms":[)";
    for (int i = 1; i <= 12; ++i) {
        if (i > 1) cloud0 += ",";
        char buf[64];
        std::snprintf(buf, sizeof(buf),
                      R"({"term":"t%02d","weight":%d.0})", i, 30 - i);
        cloud0 += buf;
    }
    cloud0 += "]}";
    write_file(dir.file("tagcloud_0.json"), cloud0);
    write_file(dir.file("tagcloud_1.json"), R"({"cluster":1,"terms":[]})");

    const Summary summary = emit_summary(dir.path());

    std::string expected;
    expected += "Profile completeness\n";
    expected += kv("positions_overview", "10");
    expected += kv("summary_description", "8");
    expected += kv("education_degree1", "9");
    expected += kv("education_degree2", "4");
    expected += kv("education_degree3", "2");
    expected += kv("total", "10");
    expected += "\n";
    expected += "Education levels\n";
    expected += kv("PhD", "1");
    expected += kv("Master", "2");
    expected += kv("Bachelor", "3");
    expected += kv("Secondary", "1");
    expected += kv("Other", "3");
    expected += kv("total", "10");
    expected += "\n";
    expected += "Clustering\n";
    expected += kv("clusters", "2");
    expected += kv("cluster 0", "6");
    expected += kv("cluster 1", "4");
    expected += "\n";
    expected += "Tag clouds (top 10 terms)\n";
    expected += "  cluster 0: t01 t02 t03 t04 t05 t06 t07 t08 t09 t10\n";
    expected += "  cluster 1: (empty)\n";
    expected += "\n";
    CHECK(summary.plain_text == expected);

    // The files carry the same bytes the call returned.
    CHECK(read_file(dir.file("summary.txt")) == summary.plain_text);
    CHECK(read_file(dir.file("summary.json")) == summary.json_text);

    // JSON: all four sections, fixed order, consistent content.
    const auto j = nlohmann::json::parse(summary.json_text);
    CHECK(j.at("completeness").at("total") == 10);
    CHECK(j.at("level_distribution").at("Bachelor") == 3);
    CHECK(j.at("clustering").at("k") == 2);
    CHECK(j.at("clustering").at("assigned_docs") == 10);
    CHECK(j.at("clustering").at("elbow_curve").size() == 3);
    CHECK(j.at("tag_clouds").size() == 2);
    CHECK(j.at("tag_clouds")[0].at("terms").size() == 10);  // truncated
    CHECK(summary.json_text.find("\"completeness\"") <
          summary.json_text.find("\"level_distribution\""));
    CHECK(summary.json_text.find("\"level_distribution\"") <
          summary.json_text.find("\"clustering\""));
    CHECK(summary.json_text.find("\"clustering\"") <
          summary.json_text.find("\"tag_clouds\""));
}

TEST_CASE("summary with a single artifact stays minimal") {
    testing::ScopedTempDir dir("summary");
    write_file(dir.file("completeness.json"),
               R"({"positions_overview":3,"summary_description":3,)"
               R"("education_degree1":3,"education_degree2":0,)"
               R"("education_degree3":0,"total":3})");
    const Summary summary = emit_summary(dir.path());
    CHECK(summary.plain_text.find("Profile completeness") == 0);
    CHECK(summary.plain_text.find("Education levels") == std::string::npos);
    CHECK(summary.plain_text.find("Clustering") == std::string::npos);
    const auto j = nlohmann::json::parse(summary.json_text);
    CHECK(j.contains("completeness"));
    CHECK_FALSE(j.contains("level_distribution"));
    CHECK_FALSE(j.contains("clustering"));
    CHECK_FALSE(j.contains("tag_clouds"));
}

TEST_CASE("summary over an empty directory is a stage error") {
    testing::ScopedTempDir dir("summary");
    CHECK_THROWS_AS(emit_summary(dir.path()), StageError);
}

#ifdef LINKMINE_CLI_PATH
namespace {

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(LINKMINE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes distinguish validation from stage failures") {
    testing::ScopedTempDir dir("cli");
    SynthConfig sc;
    sc.count = 30;
    sc.seed = 13;
    write_profiles_jsonl(generate_corpus(sc), dir.file("corpus.jsonl"));

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("report --help") == 0);

    // Validation problems: unknown commands, bad flags, bad parameters.
    CHECK(run_cli("bogus-command") == 1);
    CHECK(run_cli("classify") == 1);  // --in is required
    CHECK(run_cli("run --config " + dir.file("absent.ini")) == 1);
    CHECK(run_cli("filter --in " + dir.file("corpus.jsonl") +
                  " --ratio 2.0 --out " + dir.file("f.jsonl")) == 1);

    // Stage failures: inputs that break while the stage runs.
    CHECK(run_cli("classify --in " + dir.file("absent.jsonl") + " --out " +
                  dir.file("levels.csv") + " --distribution " +
                  dir.file("dist.json")) == 2);
    write_file(dir.file("broken.jsonl"), "{not json\n");
    CHECK(run_cli("filter --in " + dir.file("broken.jsonl") + " --out " +
                  dir.file("f.jsonl")) == 2);

    // A working invocation end to end.
    CHECK(run_cli("filter --in " + dir.file("corpus.jsonl") + " --stopwords " +
                  data_path("stopwords_en.txt") + " --out " +
                  dir.file("filtered.jsonl")) == 0);
    CHECK(line_count(dir.file("filtered.jsonl")) > 0);
}
#endif  // LINKMINE_CLI_PATH
