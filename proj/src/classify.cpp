#include "linkmine/classify.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "linkmine/util.hpp"

namespace linkmine {

std::string level_name(EducationLevel level) {
    switch (level) {
        case EducationLevel::PhD: return "PhD";
        case EducationLevel::Master: return "Master";
        case EducationLevel::Bachelor: return "Bachelor";
        case EducationLevel::Secondary: return "Secondary";
        case EducationLevel::Other: return "Other";
    }
    throw std::logic_error("bad EducationLevel");
}

EducationLevel level_from_name(const std::string& name) {
    const std::string n = utf8::to_lower(name);
    if (n == "phd") return EducationLevel::PhD;
    if (n == "master") return EducationLevel::Master;
    if (n == "bachelor") return EducationLevel::Bachelor;
    if (n == "secondary") return EducationLevel::Secondary;
    if (n == "other") return EducationLevel::Other;
    throw ConfigError("unknown education level: " + name);
}

std::size_t KeywordTable::slot(EducationLevel level) {
    switch (level) {
        case EducationLevel::PhD: return 0;
        case EducationLevel::Master: return 1;
        case EducationLevel::Bachelor: return 2;
        case EducationLevel::Secondary: return 3;
        case EducationLevel::Other: break;
    }
    throw std::logic_error("level carries no keyword set");
}

KeywordTable KeywordTable::from_lists(
    const std::map<EducationLevel, std::vector<std::string>>& lists) {
    for (EducationLevel level :
         {EducationLevel::PhD, EducationLevel::Master, EducationLevel::Bachelor,
          EducationLevel::Secondary}) {
        if (lists.count(level) == 0) {
            throw ConfigError("keyword table: missing list for level " +
                              level_name(level));
        }
    }
    KeywordTable t;
    std::unordered_set<std::string> seen;
    for (const auto& [level, words] : lists) {
        auto& set = t.sets_[slot(level)];
        for (const std::string& raw : words) {
            const std::string w = utf8::to_lower(trim(raw));
            if (w.empty()) continue;
            if (set.count(w)) continue;  // within-level duplicates collapse
            if (seen.count(w)) {
                throw ConfigError("keyword '" + w +
                                  "' appears in more than one level");
            }
            seen.insert(w);
            set.insert(w);
        }
    }
    return t;
}

KeywordTable KeywordTable::load(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("keyword table " + path + ": " + e.what());
    }
    static const std::pair<const char*, EducationLevel> kKeys[] = {
        {"phd", EducationLevel::PhD},
        {"master", EducationLevel::Master},
        {"bachelor", EducationLevel::Bachelor},
        {"secondary", EducationLevel::Secondary},
    };
    std::map<EducationLevel, std::vector<std::string>> lists;
    for (const auto& [key, level] : kKeys) {
        if (!j.contains(key) || !j[key].is_array()) {
            throw ConfigError("keyword table " + path + ": missing list '" +
                              key + "'");
        }
        for (const auto& v : j[key]) {
            if (!v.is_string()) {
                throw ConfigError("keyword table " + path + ": list '" + key +
                                  "' has a non-string entry");
            }
            lists[level].push_back(v.get<std::string>());
        }
    }
    return from_lists(lists);
}

const std::unordered_set<std::string>& KeywordTable::keywords(
    EducationLevel level) const {
    return sets_[slot(level)];
}

bool KeywordTable::contains(EducationLevel level, const std::string& token) const {
    return sets_[slot(level)].count(token) > 0;
}

std::size_t KeywordTable::total_keywords() const {
    std::size_t n = 0;
    for (const auto& s : sets_) n += s.size();
    return n;
}

std::string LevelDistribution::to_json() const {
    nlohmann::ordered_json j;
    for (EducationLevel level : kAllLevels) {
        auto it = counts.find(level);
        j[level_name(level)] = it == counts.end() ? 0 : it->second;
    }
    j["total"] = total;
    return j.dump();
}

std::vector<std::string> degree_tokens(const std::string& text) {
    std::vector<std::string> out;
    const std::string lowered = utf8::to_lower(text);
    for (const std::string& raw : split(lowered, ' ')) {
        // Raw tokens may still contain tabs/newlines; split on any space.
        std::vector<std::u32string> pieces;
        std::u32string cur;
        for (char32_t cp : utf8::decode_all(raw)) {
            if (utf8::is_space(cp)) {
                if (!cur.empty()) pieces.push_back(std::move(cur)), cur.clear();
            } else {
                cur.push_back(cp);
            }
        }
        if (!cur.empty()) pieces.push_back(std::move(cur));
        for (const std::u32string& piece : pieces) {
            // Edge strip: punctuation except dots, which dotted degree
            // keywords carry ("ph.d.", "dr.").
            std::size_t b = 0, e = piece.size();
            auto strippable = [](char32_t cp) {
                return utf8::is_punct(cp) && cp != U'.';
            };
            while (b < e && strippable(piece[b])) ++b;
            while (e > b && strippable(piece[e - 1])) --e;
            std::u32string v1(piece.begin() + b, piece.begin() + e);
            if (v1.empty()) continue;
            std::u32string v2;
            for (char32_t cp : v1) {
                if (!utf8::is_punct(cp)) v2.push_back(cp);
            }
            std::string v1s, v2s;
            for (char32_t cp : v1) utf8::encode(cp, v1s);
            for (char32_t cp : v2) utf8::encode(cp, v2s);
            // Tokens made of punctuation alone carry no signal.
            if (v2s.empty()) continue;
            out.push_back(v1s);
            if (v2s != v1s) out.push_back(v2s);
        }
    }
    return out;
}

EducationLevel classify_profile(const Profile& p, const KeywordTable& kw) {
    std::unordered_set<std::string> tokens;
    for (const auto& field :
         {p.education_degree1, p.education_degree2, p.education_degree3}) {
        if (!field) continue;
        for (auto& t : degree_tokens(*field)) tokens.insert(std::move(t));
    }
    for (EducationLevel level :
         {EducationLevel::PhD, EducationLevel::Master, EducationLevel::Bachelor,
          EducationLevel::Secondary}) {
        for (const std::string& t : tokens) {
            if (kw.contains(level, t)) return level;
        }
    }
    return EducationLevel::Other;
}

LevelDistribution level_distribution(const Dataset& d, const KeywordTable& kw) {
    LevelDistribution dist;
    for (EducationLevel level : kAllLevels) dist.counts[level] = 0;
    for (const Profile& p : d.profiles) {
        ++dist.counts[classify_profile(p, kw)];
        ++dist.total;
    }
    return dist;
}

Dataset subset_by_level(const Dataset& d, EducationLevel level,
                        const KeywordTable& kw) {
    Dataset out;
    out.provenance = d.provenance + " | subset:" + level_name(level);
    for (const Profile& p : d.profiles) {
        if (classify_profile(p, kw) == level) out.profiles.push_back(p);
    }
    return out;
}

}  // namespace linkmine
