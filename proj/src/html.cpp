#include "linkmine/html.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "linkmine/util.hpp"

namespace linkmine::html {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

const std::unordered_set<std::string>& void_tags() {
    static const std::unordered_set<std::string> tags = {
        "area", "base", "br",    "col",   "embed",  "hr",    "img",
        "input", "link", "meta", "param", "source", "track", "wbr"};
    return tags;
}

struct Tag {
    std::string name;  // lowercase
    std::vector<std::pair<std::string, std::string>> attributes;
    bool closing = false;
    bool self_closing = false;
    std::size_t start = 0;  // offset of '<'
    std::size_t end = 0;    // offset past '>'
};

// Parses the tag starting at doc[pos] == '<'; nullopt for comments,
// doctype and malformed fragments (caller skips ahead).
std::optional<Tag> parse_tag(const std::string& doc, std::size_t pos) {
    Tag t;
    t.start = pos;
    std::size_t i = pos + 1;
    if (i >= doc.size()) return std::nullopt;
    if (doc[i] == '!' || doc[i] == '?') {  // comment/doctype/PI
        std::size_t close = doc.find('>', i);
        if (close == std::string::npos) return std::nullopt;
        t.name = "!";
        t.end = close + 1;
        return t;
    }
    if (doc[i] == '/') {
        t.closing = true;
        ++i;
    }
    std::size_t name_start = i;
    while (i < doc.size() &&
           (std::isalnum(static_cast<unsigned char>(doc[i])) || doc[i] == '-')) {
        ++i;
    }
    if (i == name_start) return std::nullopt;
    t.name = lower_ascii(std::string_view(doc).substr(name_start, i - name_start));
    // attributes
    while (i < doc.size() && doc[i] != '>') {
        while (i < doc.size() && std::isspace(static_cast<unsigned char>(doc[i]))) {
            ++i;
        }
        if (i < doc.size() && doc[i] == '/') {
            t.self_closing = true;
            ++i;
            continue;
        }
        if (i >= doc.size() || doc[i] == '>') break;
        std::size_t astart = i;
        while (i < doc.size() && doc[i] != '=' && doc[i] != '>' && doc[i] != '/' &&
               !std::isspace(static_cast<unsigned char>(doc[i]))) {
            ++i;
        }
        std::string aname =
            lower_ascii(std::string_view(doc).substr(astart, i - astart));
        std::string avalue;
        if (i < doc.size() && doc[i] == '=') {
            ++i;
            if (i < doc.size() && (doc[i] == '"' || doc[i] == '\'')) {
                const char quote = doc[i++];
                std::size_t vstart = i;
                while (i < doc.size() && doc[i] != quote) ++i;
                avalue = doc.substr(vstart, i - vstart);
                if (i < doc.size()) ++i;
            } else {
                std::size_t vstart = i;
                while (i < doc.size() && doc[i] != '>' &&
                       !std::isspace(static_cast<unsigned char>(doc[i]))) {
                    ++i;
                }
                avalue = doc.substr(vstart, i - vstart);
            }
        }
        if (!aname.empty()) t.attributes.emplace_back(aname, avalue);
    }
    if (i >= doc.size()) return std::nullopt;
    t.end = i + 1;
    return t;
}

// Inner range of the element opened by `open`, honoring nesting of the
// same tag name.
std::pair<std::size_t, std::size_t> inner_range(const std::string& doc,
                                                const Tag& open) {
    if (open.self_closing || void_tags().count(open.name)) {
        return {open.end, open.end};
    }
    std::size_t depth = 1;
    std::size_t i = open.end;
    while (i < doc.size()) {
        std::size_t lt = doc.find('<', i);
        if (lt == std::string::npos) break;
        auto tag = parse_tag(doc, lt);
        if (!tag) {
            i = lt + 1;
            continue;
        }
        if (tag->name == open.name) {
            if (tag->closing) {
                --depth;
                if (depth == 0) return {open.end, tag->start};
            } else if (!tag->self_closing && !void_tags().count(tag->name)) {
                ++depth;
            }
        }
        i = tag->end;
    }
    return {open.end, doc.size()};
}

}  // namespace

std::optional<std::string> Element::attr(const std::string& name) const {
    for (const auto& [n, v] : attributes) {
        if (iequals(n, name)) return v;
    }
    return std::nullopt;
}

std::vector<Element> find_elements(const std::string& doc,
                                   const std::string& tag) {
    const std::string want = lower_ascii(tag);
    std::vector<Element> out;
    std::size_t i = 0;
    while (i < doc.size()) {
        std::size_t lt = doc.find('<', i);
        if (lt == std::string::npos) break;
        auto t = parse_tag(doc, lt);
        if (!t) {
            i = lt + 1;
            continue;
        }
        i = t->end;
        if (t->closing || t->name == "!") continue;
        if (!want.empty() && t->name != want) continue;
        auto [b, e] = inner_range(doc, *t);
        Element el;
        el.tag = t->name;
        el.attributes = t->attributes;
        el.inner_html = doc.substr(b, e - b);
        out.push_back(std::move(el));
    }
    return out;
}

std::optional<Element> find_by_attr(const std::string& doc,
                                    const std::string& tag,
                                    const std::string& attr,
                                    const std::string& value) {
    for (auto& el : find_elements(doc, tag)) {
        auto v = el.attr(attr);
        if (v && *v == value) return el;
    }
    return std::nullopt;
}

std::optional<Element> find_by_class(const std::string& doc,
                                     const std::string& tag,
                                     const std::string& cls) {
    for (auto& el : find_elements(doc, tag)) {
        auto v = el.attr("class");
        if (!v) continue;
        for (const std::string& c : split(*v, ' ')) {
            if (trim(c) == cls) return el;
        }
    }
    return std::nullopt;
}

std::string decode_entities(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '&') {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t semi = text.find(';', i);
        if (semi == std::string::npos || semi - i > 10) {
            out.push_back(text[i++]);
            continue;
        }
        const std::string entity = text.substr(i + 1, semi - i - 1);
        if (entity == "amp") {
            out.push_back('&');
        } else if (entity == "lt") {
            out.push_back('<');
        } else if (entity == "gt") {
            out.push_back('>');
        } else if (entity == "quot") {
            out.push_back('"');
        } else if (entity == "apos") {
            out.push_back('\'');
        } else if (entity == "nbsp") {
            out.push_back(' ');
        } else if (!entity.empty() && entity[0] == '#') {
            char32_t cp = 0;
            bool ok = true;
            if (entity.size() > 2 && (entity[1] == 'x' || entity[1] == 'X')) {
                for (std::size_t j = 2; j < entity.size(); ++j) {
                    const char c = entity[j];
                    if (!std::isxdigit(static_cast<unsigned char>(c))) {
                        ok = false;
                        break;
                    }
                    cp = cp * 16 +
                         (std::isdigit(static_cast<unsigned char>(c))
                              ? c - '0'
                              : std::tolower(static_cast<unsigned char>(c)) - 'a' +
                                    10);
                }
            } else {
                for (std::size_t j = 1; j < entity.size(); ++j) {
                    if (!std::isdigit(static_cast<unsigned char>(entity[j]))) {
                        ok = false;
                        break;
                    }
                    cp = cp * 10 + (entity[j] - '0');
                }
            }
            if (ok && cp > 0 && cp <= 0x10FFFF) {
                utf8::encode(cp, out);
            } else {
                out.append(text, i, semi - i + 1);
            }
        } else {
            out.append(text, i, semi - i + 1);
        }
        i = semi + 1;
    }
    return out;
}

std::string inner_text(const std::string& html_fragment) {
    std::string stripped;
    stripped.reserve(html_fragment.size());
    std::size_t i = 0;
    while (i < html_fragment.size()) {
        if (html_fragment[i] != '<') {
            stripped.push_back(html_fragment[i++]);
            continue;
        }
        auto t = parse_tag(html_fragment, i);
        if (!t) {
            stripped.push_back(html_fragment[i++]);
            continue;
        }
        if (!t->closing && (t->name == "script" || t->name == "style")) {
            auto [b, e] = inner_range(html_fragment, *t);
            std::size_t close = html_fragment.find('>', e);
            i = close == std::string::npos ? html_fragment.size() : close + 1;
            continue;
        }
        stripped.push_back(' ');  // tags separate words
        i = t->end;
    }
    return collapse_ws(decode_entities(stripped));
}

std::vector<std::string> extract_links(const std::string& doc) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < doc.size()) {
        std::size_t lt = doc.find('<', i);
        if (lt == std::string::npos) break;
        auto t = parse_tag(doc, lt);
        if (!t) {
            i = lt + 1;
            continue;
        }
        i = t->end;
        if (t->closing || t->name != "a") continue;
        for (const auto& [name, value] : t->attributes) {
            if (name == "href" && !value.empty()) {
                out.push_back(decode_entities(value));
                break;
            }
        }
    }
    return out;
}

}  // namespace linkmine::html
