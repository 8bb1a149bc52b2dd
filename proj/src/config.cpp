#include "scout/config.hpp"

#include <algorithm>
#include <map>

#include "scout/common.hpp"

namespace scout {

namespace {

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string unquote(const std::string& v, std::size_t line) {
  if (v.size() >= 2 && v.front() == '"') {
    if (v.back() != '"') throw ParseError("unterminated quoted value", line);
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        const char n = v[++i];
        out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
      } else {
        out.push_back(v[i]);
      }
    }
    return out;
  }
  return v;
}

bool needs_quotes(std::string_view v) {
  return v.empty() || v.front() == ' ' || v.back() == ' ' || v.front() == '"' ||
         v.find_first_of("#\n\t\\") != std::string_view::npos;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string section;
  std::size_t n = 0;
  for (const auto& raw : split(text, '\n')) {
    ++n;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section header", n);
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) throw ParseError("invalid section name '" + section + "'", n);
      if (std::none_of(cfg.sections_.begin(), cfg.sections_.end(), [&](const auto& s) { return s.first == section; }))
        cfg.sections_.emplace_back(section, Entries{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", n);
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) throw ParseError("invalid key '" + key + "'", n);
    std::string value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      // Quoted: the closing quote ends the value; only a comment may follow.
      std::size_t close = 1;
      while (close < value.size() && value[close] != '"') close += value[close] == '\\' ? 2 : 1;
      if (close >= value.size()) throw ParseError("unterminated quoted value", n);
      const std::string rest = trim(value.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') throw ParseError("text after quoted value", n);
      value = unquote(value.substr(0, close + 1), n);
    } else if (const auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    if (cfg.get(section, key)) throw ParseError("duplicate key '" + key + "' in [" + section + "]", n);
    cfg.set(section, key, value);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
  return parse(read_file(path));
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [name, entries] : sections_) {
    if (!name.empty()) out += (out.empty() ? "" : "\n") + std::string("[") + name + "]\n";
    for (const auto& [k, v] : entries) {
      std::string value = v;
      if (needs_quotes(v)) {
        value = "\"";
        for (char c : v) {
          if (c == '"' || c == '\\') value.push_back('\\');
          if (c == '\n') {
            value += "\\n";
            continue;
          }
          value.push_back(c);
        }
        value += "\"";
      }
      out += k + " = " + value + "\n";
    }
  }
  return out;
}

std::optional<std::string> Config::get(std::string_view section, std::string_view key) const {
  for (const auto& [name, entries] : sections_) {
    if (name != section) continue;
    for (const auto& [k, v] : entries)
      if (k == key) return v;
  }
  return std::nullopt;
}

std::string Config::get_or(std::string_view section, std::string_view key, std::string_view fallback) const {
  return get(section, key).value_or(std::string(fallback));
}

void Config::set(std::string_view section, std::string_view key, std::string_view value) {
  auto it = std::find_if(sections_.begin(), sections_.end(), [&](const auto& s) { return s.first == section; });
  if (it == sections_.end()) {
    // The unnamed section always comes first so it serializes before any header.
    it = section.empty() ? sections_.emplace(sections_.begin(), std::string(section), Entries{})
                         : sections_.emplace(sections_.end(), std::string(section), Entries{});
  }
  for (auto& [k, v] : it->second)
    if (k == key) {
      v = std::string(value);
      return;
    }
  it->second.emplace_back(std::string(key), std::string(value));
}

void Config::erase(std::string_view section, std::string_view key) {
  for (auto& [name, entries] : sections_)
    if (name == section) std::erase_if(entries, [&](const auto& e) { return e.first == key; });
}

bool Config::equivalent(const Config& other) const {
  auto flatten = [](const Config& c) {
    std::map<std::pair<std::string, std::string>, std::string> m;
    for (const auto& [name, entries] : c.sections_)
      for (const auto& [k, v] : entries) m[{name, k}] = v;
    return m;
  };
  return flatten(*this) == flatten(other);
}

}  // namespace scout
