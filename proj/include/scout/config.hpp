#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scout {

// Sectioned key = value document:
//
//   # comment
//   [section]
//   key = value        # trailing comment
//   quoted = "a # b"
//
// Keys before the first section header belong to the "" section. Section and
// key order is preserved.
class Config {
 public:
  using Entries = std::vector<std::pair<std::string, std::string>>;

  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);
  std::string serialize() const;

  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  std::string get_or(std::string_view section, std::string_view key, std::string_view fallback) const;
  void set(std::string_view section, std::string_view key, std::string_view value);
  void erase(std::string_view section, std::string_view key);

  const std::vector<std::pair<std::string, Entries>>& sections() const { return sections_; }

  // Same sections with the same key/value sets, ignoring order.
  bool equivalent(const Config& other) const;

 private:
  std::vector<std::pair<std::string, Entries>> sections_;
};

}  // namespace scout
