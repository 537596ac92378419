#include "linkmine/stopwords.hpp"

#include <sstream>

#include "linkmine/util.hpp"

namespace linkmine {

StopwordList load_stopwords(const std::string& path) {
    StopwordList out;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        std::string w = trim(line);
        if (w.empty() || w[0] == '#') continue;
        out.insert(utf8::to_lower(w));
    }
    return out;
}

}  // namespace linkmine
