#include "linkmine/textpipe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "linkmine/util.hpp"

namespace linkmine {

namespace fs = std::filesystem;

Vocabulary Vocabulary::from_sorted_terms(std::vector<std::string> sorted_terms) {
    Vocabulary v;
    v.terms = std::move(sorted_terms);
    v.index.reserve(v.terms.size());
    for (std::uint32_t i = 0; i < v.terms.size(); ++i) v.index[v.terms[i]] = i;
    return v;
}

std::size_t SparseDtm::nonzeros() const {
    std::size_t n = 0;
    for (const auto& row : rows) n += row.size();
    return n;
}

std::size_t SparseDtm::non_empty_docs() const {
    std::size_t n = 0;
    for (const auto& row : rows) n += row.empty() ? 0 : 1;
    return n;
}

Corpus build_corpus(const Dataset& d, const std::vector<CorpusField>& fields) {
    if (fields.empty()) {
        throw std::invalid_argument("build_corpus: field selection is empty");
    }
    Corpus c;
    c.docs.reserve(d.profiles.size());
    for (const Profile& p : d.profiles) {
        std::vector<std::string> parts;
        for (CorpusField f : fields) {
            const auto& v = f == CorpusField::Positions ? p.positions_overview
                                                        : p.summary_description;
            if (v && !v->empty()) parts.push_back(*v);
        }
        c.docs.push_back({p.id, join(parts, " ")});
    }
    return c;
}

std::vector<std::string> normalize(const std::string& text,
                                   const PipelineConfig& config) {
    if (config.stemming && !config.stemmer) {
        throw ConfigError("stemming enabled but no stemming algorithm is set");
    }
    std::vector<std::string> tokens;
    std::string cur;
    std::size_t i = 0;
    auto flush = [&] {
        if (cur.empty()) return;
        if (!config.stopwords.count(cur)) {
            if (config.stemming) {
                std::string stemmed = config.stemmer(cur);
                if (!stemmed.empty()) tokens.push_back(std::move(stemmed));
            } else {
                tokens.push_back(cur);
            }
        }
        cur.clear();
    };
    while (i < text.size()) {
        char32_t cp = utf8::decode(text, i);
        cp = utf8::to_lower(cp);
        if (utf8::is_space(cp) || utf8::is_punct(cp) || utf8::is_digit(cp)) {
            flush();
        } else {
            utf8::encode(cp, cur);
        }
    }
    flush();
    return tokens;
}

SparseDtm build_dtm(const Corpus& c, const PipelineConfig& config) {
    // Per-document counts first, then a deterministic sorted vocabulary.
    std::vector<std::map<std::string, std::int64_t>> doc_counts;
    doc_counts.reserve(c.docs.size());
    std::map<std::string, std::uint32_t> term_order;  // sorted merge
    for (const auto& doc : c.docs) {
        std::map<std::string, std::int64_t> counts;
        for (const std::string& tok : normalize(doc.text, config)) {
            if (utf8::length(tok) < config.min_term_length) continue;
            ++counts[tok];
        }
        for (const auto& [term, n] : counts) term_order[term] = 0;
        doc_counts.push_back(std::move(counts));
    }
    std::vector<std::string> terms;
    terms.reserve(term_order.size());
    for (const auto& [term, _] : term_order) terms.push_back(term);

    SparseDtm m;
    m.vocab = Vocabulary::from_sorted_terms(std::move(terms));
    m.weighting = Weighting::RawCount;
    m.rows.reserve(c.docs.size());
    m.doc_ids.reserve(c.docs.size());
    for (std::size_t d = 0; d < c.docs.size(); ++d) {
        m.doc_ids.push_back(c.docs[d].id);
        std::vector<SparseDtm::Entry> row;
        row.reserve(doc_counts[d].size());
        for (const auto& [term, n] : doc_counts[d]) {
            row.push_back({m.vocab.index.at(term), static_cast<double>(n)});
        }
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.col < b.col; });
        m.rows.push_back(std::move(row));
    }
    return m;
}

SparsityReport sparsity(const SparseDtm& m) {
    if (m.n_docs() == 0 || m.vocab.size() == 0) {
        throw std::invalid_argument("sparsity undefined for an empty matrix");
    }
    const double cells =
        static_cast<double>(m.n_docs()) * static_cast<double>(m.vocab.size());
    SparsityReport r;
    r.fraction = 1.0 - static_cast<double>(m.nonzeros()) / cells;
    r.percent = static_cast<int>(std::llround(r.fraction * 100.0));
    return r;
}

SparseDtm filter_low_frequency(const SparseDtm& m, std::int64_t threshold) {
    if (threshold < 0) {
        throw std::invalid_argument("frequency threshold must be >= 0");
    }
    std::vector<double> col_sums(m.vocab.size(), 0.0);
    for (const auto& row : m.rows) {
        for (const auto& e : row) col_sums[e.col] += e.value;
    }
    std::vector<std::uint32_t> remap(m.vocab.size(),
                                     std::numeric_limits<std::uint32_t>::max());
    std::vector<std::string> kept_terms;
    for (std::uint32_t col = 0; col < m.vocab.size(); ++col) {
        if (col_sums[col] >= static_cast<double>(threshold)) {
            remap[col] = static_cast<std::uint32_t>(kept_terms.size());
            kept_terms.push_back(m.vocab.terms[col]);
        }
    }
    SparseDtm out;
    out.doc_ids = m.doc_ids;
    out.vocab = Vocabulary::from_sorted_terms(std::move(kept_terms));
    out.weighting = m.weighting;
    out.rows.reserve(m.rows.size());
    for (const auto& row : m.rows) {
        std::vector<SparseDtm::Entry> new_row;
        for (const auto& e : row) {
            if (remap[e.col] != std::numeric_limits<std::uint32_t>::max()) {
                new_row.push_back({remap[e.col], e.value});
            }
        }
        out.rows.push_back(std::move(new_row));
    }
    return out;
}

SparseDtm tfidf_weight(const SparseDtm& m) {
    if (m.weighting == Weighting::TfIdf) {
        throw std::logic_error("matrix is already tf-idf weighted");
    }
    if (m.n_docs() == 0) {
        throw std::invalid_argument("tfidf_weight: matrix has no documents");
    }
    std::vector<std::size_t> df(m.vocab.size(), 0);
    for (const auto& row : m.rows) {
        for (const auto& e : row) ++df[e.col];
    }
    const double n = static_cast<double>(m.n_docs());
    SparseDtm out;
    out.doc_ids = m.doc_ids;
    out.vocab = m.vocab;
    out.weighting = Weighting::TfIdf;
    out.rows.reserve(m.rows.size());
    for (const auto& row : m.rows) {
        std::vector<SparseDtm::Entry> new_row;
        for (const auto& e : row) {
            const double idf = std::log(n / static_cast<double>(df[e.col]));
            const double w = e.value * idf;
            if (w != 0.0) new_row.push_back({e.col, w});
        }
        out.rows.push_back(std::move(new_row));
    }
    return out;
}

void save_dtm(const SparseDtm& m, const std::string& dir) {
    fs::create_directories(dir);
    nlohmann::ordered_json header;
    header["n_docs"] = m.n_docs();
    header["weighting"] = m.weighting == Weighting::RawCount ? "raw" : "tfidf";
    header["vocabulary"] = m.vocab.terms;
    header["doc_ids"] = m.doc_ids;
    write_file((fs::path(dir) / "header.json").string(), header.dump(2) + "\n");

    std::string entries = "doc,col,value\n";
    for (std::size_t d = 0; d < m.rows.size(); ++d) {
        for (const auto& e : m.rows[d]) {
            entries += std::to_string(d);
            entries += ',';
            entries += std::to_string(e.col);
            entries += ',';
            if (m.weighting == Weighting::RawCount) {
                entries += std::to_string(static_cast<std::int64_t>(e.value));
            } else {
                entries += format_double(e.value);
            }
            entries += '\n';
        }
    }
    write_file((fs::path(dir) / "entries.csv").string(), entries);
}

namespace {

// Strict numeric cell parse; partial or failed conversions are malformed
// input, not zero.
template <typename T>
T parse_entry(const std::string& s, std::size_t line_no, const char* what) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("dtm entries line " + std::to_string(line_no) +
                         ": malformed " + what);
    }
    return v;
}

}  // namespace

SparseDtm load_dtm(const std::string& dir) {
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(
            read_file((fs::path(dir) / "header.json").string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("dtm header: ") + e.what());
    }
    SparseDtm m;
    const std::string w = header.at("weighting").get<std::string>();
    if (w == "raw") {
        m.weighting = Weighting::RawCount;
    } else if (w == "tfidf") {
        m.weighting = Weighting::TfIdf;
    } else {
        throw SchemaError("dtm header: unknown weighting '" + w + "'");
    }
    m.vocab = Vocabulary::from_sorted_terms(
        header.at("vocabulary").get<std::vector<std::string>>());
    m.doc_ids = header.at("doc_ids").get<std::vector<std::string>>();
    const auto n_docs = header.at("n_docs").get<std::size_t>();
    if (n_docs != m.doc_ids.size()) {
        throw SchemaError("dtm header: n_docs does not match doc_ids");
    }
    m.rows.assign(n_docs, {});

    std::istringstream in(read_file((fs::path(dir) / "entries.csv").string()));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) continue;  // header row
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 3) {
            throw ParseError("dtm entries line " + std::to_string(line_no) +
                             ": expected doc,col,value");
        }
        const auto d =
            parse_entry<std::uint64_t>(parts[0], line_no, "doc index");
        const auto col64 =
            parse_entry<std::uint64_t>(parts[1], line_no, "column");
        const double value = parse_entry<double>(parts[2], line_no, "value");
        if (d >= n_docs || col64 >= m.vocab.size()) {
            throw SchemaError("dtm entries line " + std::to_string(line_no) +
                              ": index out of range");
        }
        const auto col = static_cast<std::uint32_t>(col64);
        if (!m.rows[d].empty() && m.rows[d].back().col >= col) {
            throw SchemaError("dtm entries line " + std::to_string(line_no) +
                              ": columns not strictly increasing");
        }
        m.rows[d].push_back({col, value});
    }
    return m;
}

std::vector<CorpusField> parse_corpus_fields(const std::string& csv) {
    std::vector<CorpusField> out;
    for (const std::string& part : split(csv, ',')) {
        const std::string f = trim(part);
        if (f.empty()) continue;
        CorpusField field;
        if (f == "positions") {
            field = CorpusField::Positions;
        } else if (f == "summary") {
            field = CorpusField::Summary;
        } else {
            throw ConfigError("unknown corpus field: " + f);
        }
        if (std::find(out.begin(), out.end(), field) != out.end()) {
            throw ConfigError("duplicate corpus field: " + f);
        }
        out.push_back(field);
    }
    if (out.empty()) throw ConfigError("no corpus fields selected");
    return out;
}

}  // namespace linkmine
