#pragma once

#include <string>
#include <unordered_set>

namespace linkmine {

using StopwordList = std::unordered_set<std::string>;

// Loads a stop-word file: one word per line, lowercased on load, blank
// lines and '#' comments ignored.
StopwordList load_stopwords(const std::string& path);

}  // namespace linkmine
