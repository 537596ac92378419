#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace linkmine {

// Error taxonomy shared across the pipeline. Parse/schema errors carry
// position info in the message; config errors abort before any work.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace utf8 {

// Decodes the code point starting at byte offset `i` and advances `i`.
// Malformed sequences decode as U+FFFD, one byte at a time.
char32_t decode(std::string_view s, std::size_t& i);

void encode(char32_t cp, std::string& out);

std::vector<char32_t> decode_all(std::string_view s);

std::string encode_all(const std::vector<char32_t>& cps);

std::size_t length(std::string_view s);

// ASCII plus Latin-1 lowercasing; other code points pass through.
char32_t to_lower(char32_t cp);

std::string to_lower(std::string_view s);

bool is_space(char32_t cp);
bool is_digit(char32_t cp);
// Punctuation and symbol characters (ASCII punct, Latin-1 signs, the
// General Punctuation block, common symbol ranges).
bool is_punct(char32_t cp);

}  // namespace utf8

// Deterministic RNG used everywhere randomness is needed. Wraps a fixed
// 64-bit generator with hand-rolled draw functions so sequences do not
// depend on standard-library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double next_double();
    // Uniform index in [0, n); n must be > 0.
    std::size_t next_index(std::size_t n);
    bool next_bernoulli(double p);
    // Standard normal via Box-Muller.
    double next_gaussian();
    // Derives an independent stream for a sub-task (restart r of scan k, ...).
    std::uint64_t derive(std::uint64_t salt) const;

private:
    std::uint64_t state_;
    std::uint64_t seed_;
    std::optional<double> spare_gaussian_;
};

std::uint64_t splitmix64(std::uint64_t x);

// 64-bit FNV-1a, used for output digests in run reports.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Shortest round-trip decimal form (std::to_chars), deterministic.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Collapses whitespace runs to single spaces and trims the ends.
std::string collapse_ws(std::string_view s);

}  // namespace linkmine
