#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linkmine/stopwords.hpp"

namespace linkmine {

// One anonymized profile record. Content fields are optional so that an
// absent field stays distinguishable from an empty string; the interchange
// format omits absent keys.
struct Profile {
    std::string id;
    std::optional<std::string> positions_overview;
    std::optional<std::string> summary_description;
    std::optional<std::string> education_degree1;
    std::optional<std::string> education_degree2;
    std::optional<std::string> education_degree3;

    bool operator==(const Profile&) const = default;

    bool has_positions() const {
        return positions_overview && !positions_overview->empty();
    }
    bool has_any_degree() const {
        return (education_degree1 && !education_degree1->empty()) ||
               (education_degree2 && !education_degree2->empty()) ||
               (education_degree3 && !education_degree3->empty());
    }
};

// The five content field names, in interchange order.
const std::vector<std::string>& profile_field_names();

struct Dataset {
    std::vector<Profile> profiles;
    std::string provenance;

    // Enforces id uniqueness.
    void append(Profile p);
    std::size_t size() const { return profiles.size(); }
};

struct CompletenessReport {
    // field name -> number of profiles with a present, non-empty value
    std::map<std::string, std::size_t> field_counts;
    std::size_t total = 0;

    std::string to_json() const;
};

// --- interchange format (UTF-8 JSON-lines, one object per line) ---

// Throws ParseError (malformed JSON, with byte offset) or SchemaError
// (missing/invalid id, non-string field). line_no is used in messages.
Profile parse_profile_record(const std::string& raw_record, std::size_t line_no = 0);

std::string serialize_profile(const Profile& p);

Dataset read_profiles_jsonl(const std::string& path);
void write_profiles_jsonl(const Dataset& d, const std::string& path);

// --- anonymization boundary ---

// Pre-anonymization record as extracted from a page: the five content
// fields plus transient personal header fields that must never survive.
struct RawProfile {
    std::string source_url;
    std::optional<std::string> positions_overview;
    std::optional<std::string> summary_description;
    std::optional<std::string> education_degree1;
    std::optional<std::string> education_degree2;
    std::optional<std::string> education_degree3;
    std::map<std::string, std::string> personal_fields;

    bool operator==(const RawProfile&) const = default;
};

// Monotone counter with a run-scoped prefix; deterministic for a fixed
// run label.
class IdGenerator {
public:
    explicit IdGenerator(std::string run_label);
    std::string next();

private:
    std::string prefix_;
    std::uint64_t counter_ = 0;
};

// Copies only the five content fields and attaches a fresh id; personal
// fields and the source URL are dropped.
Profile anonymize(const RawProfile& raw, IdGenerator& id_source);

// --- dataset filters ---

// Keeps profiles with a non-empty positions overview and at least one
// non-empty degree field. Order preserved.
Dataset filter_min_content(const Dataset& d);

// Keeps profiles whose positions text hits the stop-word list at a rate
// >= ratio_threshold (lowercased, split on whitespace/punctuation).
// Profiles with zero tokens are dropped. Throws ConfigError on an empty
// stop-word list, std::invalid_argument unless 0 < ratio_threshold < 1.
Dataset filter_english(const Dataset& d, const StopwordList& stopwords,
                       double ratio_threshold);

// Stop-word hit ratio of a text; nullopt when the text has no tokens.
std::optional<double> english_stopword_ratio(const std::string& text,
                                             const StopwordList& stopwords);

CompletenessReport completeness_report(const Dataset& d);

}  // namespace linkmine
