#pragma once

#include <cstdint>
#include <string>

#include "linkmine/profile.hpp"

namespace linkmine {

// Parameters for the bundled synthetic-corpus generator.  The generator
// emits profiles in the anonymized interchange shape (fresh ids, the five
// content fields only) so a pipeline run can start at the filter stage.
struct SynthConfig {
    std::size_t count = 500;
    std::uint64_t seed = 2024;
    // Fraction of profiles with no positions field and no degrees; these
    // are dropped by the minimum-content filter.
    double incomplete_rate = 0.08;
    // Fraction of profiles with non-English text; these fall under any
    // reasonable stop-word ratio threshold.
    double foreign_rate = 0.06;

    void validate() const;
};

// Deterministic: identical config produces byte-identical profiles, in
// order.  Profiles are drawn from a fixed set of career themes so the
// document-term matrix has recoverable cluster structure, and education
// phrasing spans every ISCED level plus keyword-free "other" text.
Dataset generate_corpus(const SynthConfig& config);

}  // namespace linkmine
