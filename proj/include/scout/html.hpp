#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Lexical HTML scanning: enough to pull start tags and anchors out of
// minified or malformed markup without building a DOM.
namespace scout::html {

struct StartTag {
  std::string name;                          // lowercased
  std::map<std::string, std::string> attrs;  // lowercased names, raw values
  std::size_t begin = 0;                     // offset of '<'
  std::size_t end = 0;                       // offset one past '>'

  std::optional<std::string> attr(const std::string& name) const;
};

// Start tags named `name` (case-insensitive) in document order. Comments are skipped.
std::vector<StartTag> find_start_tags(std::string_view doc, std::string_view name);

struct Anchor {
  std::optional<std::string> href;  // absent when the tag has no href attribute
  std::string text;                 // inner text with markup removed, whitespace collapsed
  std::string context;              // lowercased attributes and nested-tag attributes (icons, alt text)
  std::size_t offset = 0;
};

std::vector<Anchor> find_anchors(std::string_view doc);

// Decodes the handful of entities that show up in attribute values.
std::string decode_entities(std::string_view text);

}  // namespace scout::html
