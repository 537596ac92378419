#pragma once

#include <optional>
#include <string>
#include <vector>

namespace linkmine::html {

// Minimal tolerant HTML helpers for field extraction. Not a full parser:
// enough to find elements, pull their text, and collect links.

struct Element {
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string inner_html;

    std::optional<std::string> attr(const std::string& name) const;
};

// All elements with the given tag name ("" matches any tag).
std::vector<Element> find_elements(const std::string& doc,
                                   const std::string& tag);

// First element whose attribute equals the given value; tag "" = any.
std::optional<Element> find_by_attr(const std::string& doc,
                                    const std::string& tag,
                                    const std::string& attr,
                                    const std::string& value);

// First element whose class list contains the given class.
std::optional<Element> find_by_class(const std::string& doc,
                                     const std::string& tag,
                                     const std::string& cls);

// Tags stripped (script/style bodies dropped), entities decoded,
// whitespace collapsed.
std::string inner_text(const std::string& html_fragment);

// href targets of <a> tags, in document order, as written.
std::vector<std::string> extract_links(const std::string& doc);

std::string decode_entities(const std::string& text);

}  // namespace linkmine::html
