#pragma once

#include <array>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "linkmine/profile.hpp"

namespace linkmine {

// Five-way education label, ordered Other < Secondary < Bachelor < Master
// < PhD. Only the top four levels carry keyword sets; Other is the
// no-match bucket.
enum class EducationLevel : int {
    Other = 0,
    Secondary = 1,
    Bachelor = 2,
    Master = 3,
    PhD = 4,
};

constexpr std::array<EducationLevel, 5> kAllLevels = {
    EducationLevel::PhD, EducationLevel::Master, EducationLevel::Bachelor,
    EducationLevel::Secondary, EducationLevel::Other};

std::string level_name(EducationLevel level);
// Accepts the display name or its lowercase form; throws ConfigError on
// anything else.
EducationLevel level_from_name(const std::string& name);

// Keyword sets for the four classified levels. Entries are lowercase and
// pairwise disjoint across levels; duplicates within a level collapse on
// load.
class KeywordTable {
public:
    // File format: {"phd": [...], "master": [...], "bachelor": [...],
    // "secondary": [...]}. Rejects cross-level duplicates and missing
    // levels.
    static KeywordTable load(const std::string& path);
    static KeywordTable from_lists(
        const std::map<EducationLevel, std::vector<std::string>>& lists);

    const std::unordered_set<std::string>& keywords(EducationLevel level) const;
    bool contains(EducationLevel level, const std::string& token) const;
    std::size_t total_keywords() const;

private:
    KeywordTable() = default;
    // Indexed by the four classified levels; Other has no set.
    std::array<std::unordered_set<std::string>, 4> sets_;
    static std::size_t slot(EducationLevel level);
};

struct LevelDistribution {
    std::map<EducationLevel, std::size_t> counts;
    std::size_t total = 0;

    std::string to_json() const;
};

// Tokenizes one degree field for keyword matching: lowercases, splits on
// whitespace, and per raw token emits the edge-punctuation-stripped form
// (dots always kept, so "Ph.D.," yields "ph.d.") plus, when different,
// the fully punctuation-stripped form ("phd").
std::vector<std::string> degree_tokens(const std::string& text);

// Highest level whose keyword set intersects the degree-field tokens;
// Other when nothing matches. Positions/summary never participate.
EducationLevel classify_profile(const Profile& p, const KeywordTable& kw);

LevelDistribution level_distribution(const Dataset& d, const KeywordTable& kw);

Dataset subset_by_level(const Dataset& d, EducationLevel level,
                        const KeywordTable& kw);

}  // namespace linkmine
