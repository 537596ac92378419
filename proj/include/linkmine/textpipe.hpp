#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "linkmine/profile.hpp"
#include "linkmine/stopwords.hpp"

namespace linkmine {

enum class CorpusField { Positions, Summary };

// One text document per profile, aligned with the source dataset.
struct Corpus {
    struct Doc {
        std::string id;
        std::string text;
    };
    std::vector<Doc> docs;
};

using Stemmer = std::function<std::string(const std::string&)>;

struct PipelineConfig {
    StopwordList stopwords;
    std::size_t min_term_length = 5;  // in characters, after normalization
    std::int64_t frequency_threshold = 50;
    bool stemming = false;  // off by default; no stemmer ships
    Stemmer stemmer;        // must be set when stemming is enabled
};

// Ordered distinct terms; index = DTM column. Sorted lexicographically
// (byte order) so vocabulary layout is reproducible.
struct Vocabulary {
    std::vector<std::string> terms;
    std::unordered_map<std::string, std::uint32_t> index;

    static Vocabulary from_sorted_terms(std::vector<std::string> sorted_terms);
    std::size_t size() const { return terms.size(); }
};

enum class Weighting { RawCount, TfIdf };

// Document-major sparse matrix; rows hold (column, value) with strictly
// increasing columns and no explicit zeros.
struct SparseDtm {
    struct Entry {
        std::uint32_t col;
        double value;
        bool operator==(const Entry&) const = default;
    };
    std::vector<std::string> doc_ids;
    Vocabulary vocab;
    std::vector<std::vector<Entry>> rows;
    Weighting weighting = Weighting::RawCount;

    std::size_t n_docs() const { return rows.size(); }
    std::size_t nonzeros() const;
    std::size_t non_empty_docs() const;
};

struct SparsityReport {
    double fraction = 0.0;  // exact zero fraction
    int percent = 0;        // rounded to nearest integer percent
};

// Concatenates the selected fields (present ones only) per profile into
// one document each; empty documents are kept for alignment.
Corpus build_corpus(const Dataset& d, const std::vector<CorpusField>& fields);

// Lowercase -> punctuation/digits to spaces -> split on whitespace ->
// drop stop-words and empties -> optional stemming. Throws ConfigError
// when stemming is enabled without a stemmer.
std::vector<std::string> normalize(const std::string& text,
                                   const PipelineConfig& config);

// Raw-count DTM over normalized tokens of length >= min_term_length.
SparseDtm build_dtm(const Corpus& c, const PipelineConfig& config);

// Throws std::invalid_argument on an empty matrix.
SparsityReport sparsity(const SparseDtm& m);

// Keeps columns whose total count across documents >= threshold.
// Documents that lose every term stay as empty rows.
SparseDtm filter_low_frequency(const SparseDtm& m, std::int64_t threshold);

// tf * ln(N/df) reweighting; entries for terms present in every document
// become zero and are dropped from storage. Throws std::logic_error if
// the matrix is already tf-idf weighted.
SparseDtm tfidf_weight(const SparseDtm& m);

// --- on-disk format: <dir>/header.json + <dir>/entries.csv ---
// header.json: {"n_docs", "weighting", "vocabulary", "doc_ids"};
// entries.csv: "doc,col,value" lines sorted by (doc, col), raw counts
// printed as integers. Byte-stable for golden tests.
void save_dtm(const SparseDtm& m, const std::string& dir);
SparseDtm load_dtm(const std::string& dir);

std::vector<CorpusField> parse_corpus_fields(const std::string& csv);

}  // namespace linkmine
