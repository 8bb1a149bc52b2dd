#include "scout/html.hpp"

#include <cctype>

#include "scout/common.hpp"

namespace scout::html {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.';
}

// Parses the tag starting at doc[pos] == '<'. Returns the end offset (one
// past '>') or npos if unterminated.
std::size_t parse_tag(std::string_view doc, std::size_t pos, StartTag& tag) {
  std::size_t i = pos + 1;
  const std::size_t name_start = i;
  while (i < doc.size() && name_char(doc[i])) ++i;
  tag.name = to_lower(doc.substr(name_start, i - name_start));
  tag.attrs.clear();
  tag.begin = pos;
  while (i < doc.size()) {
    while (i < doc.size() && (is_space(doc[i]) || doc[i] == '/')) ++i;
    if (i >= doc.size()) break;
    if (doc[i] == '>') {
      tag.end = i + 1;
      return tag.end;
    }
    const std::size_t an = i;
    while (i < doc.size() && !is_space(doc[i]) && doc[i] != '=' && doc[i] != '>' && doc[i] != '/') ++i;
    std::string attr_name = to_lower(doc.substr(an, i - an));
    if (i == an) {  // stray character
      ++i;
      continue;
    }
    while (i < doc.size() && is_space(doc[i])) ++i;
    std::string value;
    if (i < doc.size() && doc[i] == '=') {
      ++i;
      while (i < doc.size() && is_space(doc[i])) ++i;
      if (i < doc.size() && (doc[i] == '"' || doc[i] == '\'')) {
        const char q = doc[i++];
        const auto close = doc.find(q, i);
        if (close == std::string_view::npos) return std::string_view::npos;
        value = std::string(doc.substr(i, close - i));
        i = close + 1;
      } else {
        const std::size_t vs = i;
        while (i < doc.size() && !is_space(doc[i]) && doc[i] != '>') ++i;
        value = std::string(doc.substr(vs, i - vs));
      }
    }
    tag.attrs.emplace(std::move(attr_name), decode_entities(value));
  }
  return std::string_view::npos;
}

bool starts_with_icase(std::string_view doc, std::size_t pos, std::string_view prefix) {
  return pos + prefix.size() <= doc.size() && iequals(doc.substr(pos, prefix.size()), prefix);
}

std::size_t find_icase(std::string_view doc, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= doc.size(); ++i)
    if (starts_with_icase(doc, i, needle)) return i;
  return std::string_view::npos;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::optional<std::string> StartTag::attr(const std::string& n) const {
  const auto it = attrs.find(n);
  if (it == attrs.end()) return std::nullopt;
  return it->second;
}

std::string decode_entities(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '&') {
      static constexpr std::pair<std::string_view, char> kEntities[] = {
          {"&amp;", '&'}, {"&quot;", '"'}, {"&#39;", '\''}, {"&apos;", '\''}, {"&lt;", '<'}, {"&gt;", '>'}};
      bool matched = false;
      for (const auto& [ent, ch] : kEntities)
        if (text.substr(i, ent.size()) == ent) {
          out.push_back(ch);
          i += ent.size() - 1;
          matched = true;
          break;
        }
      if (matched) continue;
    }
    out.push_back(text[i]);
  }
  return out;
}

std::vector<StartTag> find_start_tags(std::string_view doc, std::string_view name) {
  std::vector<StartTag> out;
  std::size_t i = 0;
  while ((i = doc.find('<', i)) != std::string_view::npos) {
    if (doc.substr(i, 4) == "<!--") {
      const auto close = doc.find("-->", i + 4);
      if (close == std::string_view::npos) break;
      i = close + 3;
      continue;
    }
    if (starts_with_icase(doc, i + 1, name) &&
        (i + 1 + name.size() >= doc.size() || !name_char(doc[i + 1 + name.size()]))) {
      StartTag tag;
      const auto end = parse_tag(doc, i, tag);
      if (end == std::string_view::npos) break;
      out.push_back(std::move(tag));
      i = end;
      continue;
    }
    ++i;
  }
  return out;
}

std::vector<Anchor> find_anchors(std::string_view doc) {
  std::vector<Anchor> out;
  for (const auto& tag : find_start_tags(doc, "a")) {
    Anchor a;
    a.offset = tag.begin;
    a.href = tag.attr("href");
    for (const auto& [k, v] : tag.attrs)
      if (k != "href") a.context += to_lower(v) + " ";
    auto close = find_icase(doc, "</a", tag.end);
    if (close == std::string_view::npos) close = std::min(doc.size(), tag.end + 512);
    const std::string_view inner = doc.substr(tag.end, close - tag.end);
    // Strip nested tags into text; keep their attribute values as context.
    std::string text;
    std::size_t j = 0;
    while (j < inner.size()) {
      if (inner[j] == '<') {
        StartTag nested;
        const auto e = parse_tag(inner, j, nested);
        if (e == std::string_view::npos) break;
        for (const auto& [k, v] : nested.attrs) a.context += to_lower(v) + " ";
        a.context += nested.name + " ";
        text.push_back(' ');
        j = e;
        continue;
      }
      text.push_back(inner[j++]);
    }
    a.text = collapse_ws(decode_entities(text));
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace scout::html
