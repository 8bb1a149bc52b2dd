#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace scout {

// A parsed absolute (or scheme-less) URL. Scheme and host are lowercased.
struct Url {
  std::string scheme;  // empty when the input had no "scheme://"
  std::string host;
  int port = 0;        // 0 = scheme default
  std::string path;    // always starts with '/'; includes query, excludes fragment

  // scheme://host[:port]
  std::string origin() const;
  std::string str() const;
  int effective_port() const;

  friend bool operator==(const Url&, const Url&) = default;
};

// Throws ParseError on anything that is not scheme://host[:port][/path] or
// host[/path] with a valid hostname / IPv4 literal.
Url parse_url(std::string_view text);

// Resolves `ref` (absolute, scheme-relative, root-relative or relative)
// against `base`.
Url resolve_url(const Url& base, std::string_view ref);

// Labels 1-63 chars of [a-z0-9-], no leading/trailing hyphen, total <= 253.
bool is_valid_dns_name(std::string_view name);
bool is_ipv4_literal(std::string_view host);

// Public-suffix matcher (normal, wildcard and exception rules).
class PublicSuffixList {
 public:
  static PublicSuffixList parse(std::string_view text);
  // The snapshot bundled with the library.
  static const PublicSuffixList& bundled();

  // Longest matching public suffix of `host` (default rule "*").
  std::string public_suffix(std::string_view host) const;
  // eTLD+1, or nullopt when the host is itself a public suffix. IPv4
  // literals are returned unchanged.
  std::optional<std::string> registrable_domain(std::string_view host) const;

  std::size_t size() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // "*.foo" stored as "foo"
  std::unordered_set<std::string> exceptions_;  // "!bar.foo" stored as "bar.foo"
};

}  // namespace scout
