#include "scout/url.hpp"

#include <algorithm>
#include <charconv>

#include "bundled_data.hpp"
#include "scout/common.hpp"

namespace scout {

std::string Url::origin() const {
  std::string out = scheme.empty() ? host : scheme + "://" + host;
  if (port) out += ":" + std::to_string(port);
  return out;
}

std::string Url::str() const { return origin() + path; }

int Url::effective_port() const {
  if (port) return port;
  if (scheme == "https") return 443;
  if (scheme == "http") return 80;
  return 0;
}

bool is_valid_dns_name(std::string_view name) {
  if (name.empty() || name.size() > 253) return false;
  for (const auto& label : split(name, '.')) {
    if (label.empty() || label.size() > 63) return false;
    if (label.front() == '-' || label.back() == '-') return false;
    for (char c : label)
      if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  }
  return true;
}

bool is_ipv4_literal(std::string_view host) {
  const auto parts = split(host, '.');
  if (parts.size() != 4) return false;
  for (const auto& p : parts) {
    if (p.empty() || p.size() > 3) return false;
    int v = -1;
    auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (ec != std::errc() || ptr != p.data() + p.size() || v < 0 || v > 255) return false;
  }
  return true;
}

Url parse_url(std::string_view text) {
  const std::string raw = trim(text);
  auto fail = [&] { return ParseError("unparseable URL '" + raw + "'"); };
  Url url;
  std::string_view rest = raw;
  if (const auto sep = rest.find("://"); sep != std::string_view::npos) {
    url.scheme = to_lower(rest.substr(0, sep));
    if (url.scheme.empty() || !std::all_of(url.scheme.begin(), url.scheme.end(), [](char c) {
          return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
        }))
      throw fail();
    rest.remove_prefix(sep + 3);
  }
  if (const auto frag = rest.find('#'); frag != std::string_view::npos) rest = rest.substr(0, frag);
  const auto path_start = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, path_start);
  if (path_start != std::string_view::npos) {
    url.path = std::string(rest.substr(path_start));
    if (url.path.front() == '?') url.path.insert(url.path.begin(), '/');
  } else {
    url.path = "/";
  }
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const auto port_text = authority.substr(colon + 1);
    int port = 0;
    auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || p != port_text.data() + port_text.size() || port <= 0 || port > 65535)
      throw fail();
    url.port = port;
    authority = authority.substr(0, colon);
  }
  url.host = to_lower(authority);
  if (!url.host.empty() && url.host.back() == '.') url.host.pop_back();
  // Underscores occur in real hostnames even though they are not DNS-valid.
  std::string probe = url.host;
  std::replace(probe.begin(), probe.end(), '_', 'a');
  if (!is_valid_dns_name(probe) && !is_ipv4_literal(url.host)) throw fail();
  if (url.port && url.port == Url{url.scheme, "", 0, "/"}.effective_port()) url.port = 0;
  return url;
}

Url resolve_url(const Url& base, std::string_view ref_in) {
  const std::string ref = trim(ref_in);
  if (ref.find("://") != std::string::npos) return parse_url(ref);
  if (ref.rfind("//", 0) == 0) return parse_url(base.scheme + ":" + ref);
  Url out = base;
  if (ref.empty()) return out;
  if (ref.front() == '/') {
    out.path = ref;
  } else if (ref.front() == '?') {
    out.path = base.path.substr(0, base.path.find('?')) + ref;
  } else {
    std::string dir = base.path.substr(0, base.path.find('?'));
    dir = dir.substr(0, dir.rfind('/') + 1);
    out.path = dir + ref;
  }
  if (const auto frag = out.path.find('#'); frag != std::string::npos) out.path.erase(frag);
  // Collapse "." and ".." segments.
  const auto q = out.path.find('?');
  const std::string query = q == std::string::npos ? "" : out.path.substr(q);
  std::vector<std::string> segs;
  const auto parts = split(out.path.substr(0, q), '/');
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i] == ".") continue;
    if (parts[i] == "..") {
      if (!segs.empty()) segs.pop_back();
      continue;
    }
    segs.push_back(parts[i]);
  }
  std::string path;
  for (const auto& s : segs) path += "/" + s;
  if (path.empty() || parts.back() == "." || parts.back() == "..") path += "/";
  out.path = path + query;
  return out;
}

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
  PublicSuffixList psl;
  for (const auto& raw_line : split(text, '\n')) {
    // Rules are the first whitespace-delimited token of a non-comment line.
    const std::string line = trim(raw_line);
    if (line.empty() || line.rfind("//", 0) == 0) continue;
    std::string rule = to_lower(line.substr(0, line.find_first_of(" \t")));
    if (rule.rfind("!", 0) == 0) {
      psl.exceptions_.insert(rule.substr(1));
    } else if (rule.rfind("*.", 0) == 0) {
      psl.wildcards_.insert(rule.substr(2));
    } else {
      psl.rules_.insert(std::move(rule));
    }
  }
  return psl;
}

const PublicSuffixList& PublicSuffixList::bundled() {
  static const PublicSuffixList instance = parse(bundled::public_suffix_list());
  return instance;
}

std::string PublicSuffixList::public_suffix(std::string_view host_in) const {
  const std::string host = to_lower(host_in);
  const auto labels = split(host, '.');
  const std::size_t n = labels.size();
  // suffix_of(k) = last k labels joined.
  auto suffix_of = [&](std::size_t k) {
    std::string s;
    for (std::size_t i = n - k; i < n; ++i) s += (s.empty() ? "" : ".") + labels[i];
    return s;
  };
  std::size_t best = 1;  // default rule "*"
  for (std::size_t k = 1; k <= n; ++k) {
    const std::string s = suffix_of(k);
    if (exceptions_.count(s)) return suffix_of(k - 1);
    if (rules_.count(s)) best = std::max(best, k);
    if (k < n && wildcards_.count(s)) best = std::max(best, k + 1);
  }
  return suffix_of(std::min(best, n));
}

std::optional<std::string> PublicSuffixList::registrable_domain(std::string_view host_in) const {
  const std::string host = to_lower(host_in);
  if (host.empty()) return std::nullopt;
  if (is_ipv4_literal(host)) return host;
  const std::string suffix = public_suffix(host);
  if (suffix.size() >= host.size()) return std::nullopt;
  const std::string head = host.substr(0, host.size() - suffix.size() - 1);
  const auto dot = head.rfind('.');
  return (dot == std::string::npos ? head : head.substr(dot + 1)) + "." + suffix;
}

}  // namespace scout
