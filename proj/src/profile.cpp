#include "linkmine/profile.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "linkmine/util.hpp"

namespace linkmine {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string>& profile_field_names() {
    static const std::vector<std::string> names = {
        "positions_overview", "summary_description",
        "education_degree1",  "education_degree2",
        "education_degree3",
    };
    return names;
}

void Dataset::append(Profile p) {
    for (const Profile& q : profiles) {
        if (q.id == p.id) {
            throw SchemaError("duplicate profile id: " + p.id);
        }
    }
    profiles.push_back(std::move(p));
}

std::string CompletenessReport::to_json() const {
    ordered_json j;
    for (const auto& name : profile_field_names()) {
        auto it = field_counts.find(name);
        j[name] = it == field_counts.end() ? 0 : it->second;
    }
    j["total"] = total;
    return j.dump();
}

namespace {

std::optional<std::string>* field_slot(Profile& p, const std::string& key) {
    if (key == "positions_overview") return &p.positions_overview;
    if (key == "summary_description") return &p.summary_description;
    if (key == "education_degree1") return &p.education_degree1;
    if (key == "education_degree2") return &p.education_degree2;
    if (key == "education_degree3") return &p.education_degree3;
    return nullptr;
}

const std::optional<std::string>& field_value(const Profile& p,
                                              const std::string& key) {
    return *field_slot(const_cast<Profile&>(p), key);
}

std::string line_tag(std::size_t line_no) {
    return line_no ? "line " + std::to_string(line_no) + ": " : "";
}

}  // namespace

Profile parse_profile_record(const std::string& raw_record, std::size_t line_no) {
    ordered_json j;
    try {
        j = ordered_json::parse(raw_record);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_tag(line_no) + "malformed record at byte " +
                         std::to_string(e.byte) + ": " + e.what());
    }
    if (!j.is_object()) {
        // Well-formed JSON of the wrong shape is a schema problem, not a
        // parse problem.
        throw SchemaError(line_tag(line_no) + "record is not a JSON object");
    }
    if (!j.contains("id")) {
        throw SchemaError(line_tag(line_no) + "missing required key 'id'");
    }
    if (!j["id"].is_string() || j["id"].get<std::string>().empty()) {
        throw SchemaError(line_tag(line_no) + "'id' must be a non-empty string");
    }
    Profile p;
    p.id = j["id"].get<std::string>();
    for (const auto& name : profile_field_names()) {
        if (!j.contains(name)) continue;
        if (!j[name].is_string()) {
            throw SchemaError(line_tag(line_no) + "'" + name +
                              "' must be a string");
        }
        *field_slot(p, name) = j[name].get<std::string>();
    }
    // Unknown keys are ignored.
    return p;
}

std::string serialize_profile(const Profile& p) {
    ordered_json j;
    j["id"] = p.id;
    for (const auto& name : profile_field_names()) {
        const auto& v = field_value(p, name);
        if (v) j[name] = *v;
    }
    return j.dump();
}

Dataset read_profiles_jsonl(const std::string& path) {
    Dataset d;
    d.provenance = "file:" + path;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        d.append(parse_profile_record(line, line_no));
    }
    return d;
}

void write_profiles_jsonl(const Dataset& d, const std::string& path) {
    std::string out;
    for (const Profile& p : d.profiles) {
        out += serialize_profile(p);
        out += '\n';
    }
    write_file(path, out);
}

IdGenerator::IdGenerator(std::string run_label) : prefix_(std::move(run_label)) {}

std::string IdGenerator::next() {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "-%06" PRIu64, ++counter_);
    return prefix_ + buf;
}

Profile anonymize(const RawProfile& raw, IdGenerator& id_source) {
    Profile p;
    p.id = id_source.next();
    p.positions_overview = raw.positions_overview;
    p.summary_description = raw.summary_description;
    p.education_degree1 = raw.education_degree1;
    p.education_degree2 = raw.education_degree2;
    p.education_degree3 = raw.education_degree3;
    return p;
}

Dataset filter_min_content(const Dataset& d) {
    Dataset out;
    out.provenance = d.provenance + " | filter:min_content";
    for (const Profile& p : d.profiles) {
        if (p.has_positions() && p.has_any_degree()) out.profiles.push_back(p);
    }
    return out;
}

std::optional<double> english_stopword_ratio(const std::string& text,
                                             const StopwordList& stopwords) {
    std::size_t tokens = 0, hits = 0;
    std::string cur;
    std::size_t i = 0;
    auto flush = [&] {
        if (cur.empty()) return;
        ++tokens;
        if (stopwords.count(cur)) ++hits;
        cur.clear();
    };
    while (i < text.size()) {
        const char32_t cp = utf8::decode(text, i);
        if (utf8::is_space(cp) || utf8::is_punct(cp)) {
            flush();
        } else {
            utf8::encode(utf8::to_lower(cp), cur);
        }
    }
    flush();
    if (tokens == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(tokens);
}

Dataset filter_english(const Dataset& d, const StopwordList& stopwords,
                       double ratio_threshold) {
    if (stopwords.empty()) {
        throw ConfigError("filter_english: stop-word list is empty");
    }
    if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0)) {
        throw std::invalid_argument(
            "filter_english: ratio_threshold must be in (0, 1)");
    }
    Dataset out;
    out.provenance = d.provenance + " | filter:english";
    for (const Profile& p : d.profiles) {
        if (!p.positions_overview) continue;
        auto ratio = english_stopword_ratio(*p.positions_overview, stopwords);
        if (ratio && *ratio >= ratio_threshold) out.profiles.push_back(p);
    }
    return out;
}

CompletenessReport completeness_report(const Dataset& d) {
    CompletenessReport r;
    r.total = d.profiles.size();
    for (const auto& name : profile_field_names()) r.field_counts[name] = 0;
    for (const Profile& p : d.profiles) {
        for (const auto& name : profile_field_names()) {
            const auto& v = field_value(p, name);
            if (v && !v->empty()) ++r.field_counts[name];
        }
    }
    return r;
}

}  // namespace linkmine
