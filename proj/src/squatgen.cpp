#include "scout/squatgen.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "bundled_data.hpp"

namespace scout {

namespace {

constexpr std::array<std::pair<RuleKind, std::string_view>, 10> kRuleNames = {{
    {RuleKind::omission, "omission"},
    {RuleKind::insertion, "insertion"},
    {RuleKind::transposition, "transposition"},
    {RuleKind::repetition, "repetition"},
    {RuleKind::replacement, "replacement"},
    {RuleKind::homoglyph, "homoglyph"},
    {RuleKind::bitsquat, "bitsquat"},
    {RuleKind::hyphenation, "hyphenation"},
    {RuleKind::tld_swap, "tld_swap"},
    {RuleKind::term_affix, "term_affix"},
}};

// QWERTY neighbours, as used by common typo-squatting fuzzers.
std::string_view keyboard_neighbours(char c) {
  switch (c) {
    case '1': return "2q";
    case '2': return "3wq1";
    case '3': return "4ew2";
    case '4': return "5re3";
    case '5': return "6tr4";
    case '6': return "7yt5";
    case '7': return "8uy6";
    case '8': return "9iu7";
    case '9': return "0oi8";
    case '0': return "po9";
    case 'q': return "12wa";
    case 'w': return "3esaq2";
    case 'e': return "4rdsw3";
    case 'r': return "5tfde4";
    case 't': return "6ygfr5";
    case 'y': return "7uhgt6";
    case 'u': return "8ijhy7";
    case 'i': return "9okju8";
    case 'o': return "0plki9";
    case 'p': return "lo0";
    case 'a': return "qwsz";
    case 's': return "edxzaw";
    case 'd': return "rfcxse";
    case 'f': return "tgvcdr";
    case 'g': return "yhbvft";
    case 'h': return "ujnbgy";
    case 'j': return "ikmnhu";
    case 'k': return "olmji";
    case 'l': return "kop";
    case 'z': return "asx";
    case 'x': return "zsdc";
    case 'c': return "xdfv";
    case 'v': return "cfgb";
    case 'b': return "vghn";
    case 'n': return "bhjm";
    case 'm': return "njk";
    default: return "";
  }
}

bool dns_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-'; }

// Each generator emits label variants (not full domains) into `out`.
using Labels = std::vector<std::string>;

void omission(const std::string& l, Labels& out) {
  for (std::size_t i = 0; i < l.size(); ++i) out.push_back(l.substr(0, i) + l.substr(i + 1));
}

void insertion(const std::string& l, Labels& out) {
  for (std::size_t i = 0; i < l.size(); ++i)
    for (char k : keyboard_neighbours(l[i])) {
      out.push_back(l.substr(0, i) + k + l.substr(i));
      out.push_back(l.substr(0, i + 1) + k + l.substr(i + 1));
    }
}

void transposition(const std::string& l, Labels& out) {
  for (std::size_t i = 0; i + 1 < l.size(); ++i) {
    if (l[i] == l[i + 1]) continue;
    std::string s = l;
    std::swap(s[i], s[i + 1]);
    out.push_back(std::move(s));
  }
}

void repetition(const std::string& l, Labels& out) {
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l[i] != '-') out.push_back(l.substr(0, i + 1) + l[i] + l.substr(i + 1));
}

void replacement(const std::string& l, Labels& out) {
  for (std::size_t i = 0; i < l.size(); ++i)
    for (char k : keyboard_neighbours(l[i])) {
      std::string s = l;
      s[i] = k;
      out.push_back(std::move(s));
    }
}

void homoglyph(const std::string& l, const GlyphTable& table, Labels& out) {
  auto substitute = [&](const std::string& from, const std::string& to) {
    for (auto pos = l.find(from); pos != std::string::npos; pos = l.find(from, pos + 1))
      out.push_back(l.substr(0, pos) + to + l.substr(pos + from.size()));
  };
  for (const auto& [a, b] : table) {
    substitute(a, b);
    substitute(b, a);
  }
}

void bitsquat(const std::string& l, Labels& out) {
  for (std::size_t i = 0; i < l.size(); ++i)
    for (int bit = 0; bit < 8; ++bit) {
      const char c = static_cast<char>(static_cast<unsigned char>(l[i]) ^ (1u << bit));
      if (!dns_char(c)) continue;
      std::string s = l;
      s[i] = c;
      out.push_back(std::move(s));
    }
}

void hyphenation(const std::string& l, Labels& out) {
  for (std::size_t i = 1; i < l.size(); ++i) {
    if (l[i - 1] == '-' || l[i] == '-') continue;
    out.push_back(l.substr(0, i) + "-" + l.substr(i));
  }
}

void term_affix(const std::string& l, const std::vector<std::string>& terms, Labels& out) {
  for (const auto& raw : terms) {
    const std::string t = to_lower(trim(raw));
    if (t.empty()) continue;
    out.push_back(t + l);
    out.push_back(l + t);
    out.push_back(t + "-" + l);
    out.push_back(l + "-" + t);
  }
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  for (const auto& [k, name] : kRuleNames)
    if (k == kind) return name;
  return "unknown";
}

RuleKind parse_rule_kind(std::string_view name) {
  const std::string n = to_lower(trim(name));
  for (const auto& [k, text] : kRuleNames)
    if (text == n) return k;
  if (n == "addition") return RuleKind::insertion;
  if (n == "tld-swap") return RuleKind::tld_swap;
  if (n == "term-affix") return RuleKind::term_affix;
  throw ParseError("unknown permutation rule '" + std::string(name) + "'");
}

std::vector<RuleKind> parse_rule_list(std::string_view csv) {
  std::vector<RuleKind> out;
  for (const auto& item : split(csv, ',')) {
    if (trim(item).empty()) continue;
    if (to_lower(trim(item)) == "all") {
      for (const auto& [k, name] : kRuleNames) out.push_back(k);
      continue;
    }
    out.push_back(parse_rule_kind(item));
  }
  return out;
}

GlyphTable parse_glyph_table(std::string_view text) {
  GlyphTable table;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = split(line, ' ');
    std::vector<std::string> toks;
    for (const auto& p : parts)
      if (!trim(p).empty()) toks.push_back(to_lower(trim(p)));
    if (toks.size() != 2) throw ParseError("homoglyph line needs two tokens", line_no);
    for (const auto& t : toks)
      if (!std::all_of(t.begin(), t.end(), dns_char)) throw ParseError("homoglyph outside [a-z0-9-]", line_no);
    table.emplace_back(toks[0], toks[1]);
  }
  return table;
}

const GlyphTable& bundled_glyph_table() {
  static const GlyphTable table = parse_glyph_table(bundled::homoglyphs());
  return table;
}

PermutationRule PermutationRule::with_defaults(RuleKind kind) {
  PermutationRule r;
  r.kind = kind;
  if (kind == RuleKind::tld_swap) r.terms = kDefaultSwapTlds;
  if (kind == RuleKind::term_affix) r.terms = kDefaultTerms;
  if (kind == RuleKind::homoglyph) r.glyphs = bundled_glyph_table();
  return r;
}

bool PermutationRule::table_driven() const {
  return kind == RuleKind::homoglyph || kind == RuleKind::tld_swap || kind == RuleKind::term_affix;
}

std::string_view to_string(CandidateSource source) {
  return source == CandidateSource::fuzzer ? "fuzzer" : "ct_stream";
}

std::string to_json_line(const CandidateDomain& c) {
  nlohmann::ordered_json j;
  j["domain"] = c.domain;
  j["source"] = to_string(c.source);
  j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
  j["rule"] = c.rule ? nlohmann::ordered_json(to_string(*c.rule)) : nlohmann::ordered_json(nullptr);
  j["first_seen"] = format_rfc3339(c.first_seen);
  return j.dump();
}

CandidateDomain candidate_from_json(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed candidate JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("domain") || !j["domain"].is_string())
    throw ParseError("candidate record without 'domain'");
  CandidateDomain c;
  c.domain = to_lower(j["domain"].get<std::string>());
  if (!is_valid_dns_name(c.domain)) throw ParseError("candidate '" + c.domain + "' is not a valid DNS name");
  const std::string source = j.value("source", "fuzzer");
  if (source == "fuzzer")
    c.source = CandidateSource::fuzzer;
  else if (source == "ct_stream")
    c.source = CandidateSource::ct_stream;
  else
    throw ParseError("unknown candidate source '" + source + "'");
  if (j.contains("seed") && j["seed"].is_string()) c.seed = j["seed"].get<std::string>();
  if (j.contains("rule") && j["rule"].is_string()) c.rule = parse_rule_kind(j["rule"].get<std::string>());
  if (j.contains("first_seen") && j["first_seen"].is_string())
    c.first_seen = parse_rfc3339(j["first_seen"].get<std::string>());
  return c;
}

std::vector<CandidateDomain> load_candidates(const std::filesystem::path& path) {
  std::vector<CandidateDomain> out;
  std::size_t line_no = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(candidate_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

void save_candidates(const std::filesystem::path& path, std::span<const CandidateDomain> candidates) {
  std::string out;
  for (const auto& c : candidates) out += to_json_line(c) + "\n";
  write_file(path, out);
}

std::vector<CandidateDomain> permute_domain(std::string_view seed_domain, std::span<const PermutationRule> rules,
                                            const PermuteContext& ctx) {
  const PublicSuffixList& psl = ctx.psl ? *ctx.psl : PublicSuffixList::bundled();
  const std::string seed = to_lower(trim(seed_domain));
  if (!is_valid_dns_name(seed)) throw DataError("invalid seed domain '" + seed + "'");
  const auto registrable = psl.registrable_domain(seed);
  if (!registrable || *registrable != seed) throw DataError("seed '" + seed + "' is not a registrable domain");
  if (rules.empty()) throw DataError("no permutation rules given");
  const std::string suffix = psl.public_suffix(seed);
  const std::string label = seed.substr(0, seed.size() - suffix.size() - 1);

  std::map<std::string, RuleKind> found;
  for (const auto& rule : rules) {
    if (rule.table_driven() && rule.terms.empty() && rule.glyphs.empty())
      throw DataError("rule '" + std::string(to_string(rule.kind)) + "' needs a parameter table");
    Labels labels;
    std::vector<std::string> domains;
    switch (rule.kind) {
      case RuleKind::omission: omission(label, labels); break;
      case RuleKind::insertion: insertion(label, labels); break;
      case RuleKind::transposition: transposition(label, labels); break;
      case RuleKind::repetition: repetition(label, labels); break;
      case RuleKind::replacement: replacement(label, labels); break;
      case RuleKind::homoglyph: homoglyph(label, rule.glyphs, labels); break;
      case RuleKind::bitsquat: bitsquat(label, labels); break;
      case RuleKind::hyphenation: hyphenation(label, labels); break;
      case RuleKind::term_affix: term_affix(label, rule.terms, labels); break;
      case RuleKind::tld_swap:
        for (const auto& tld : rule.terms) {
          const std::string t = to_lower(trim(tld));
          if (!t.empty() && t != suffix) domains.push_back(label + "." + t);
        }
        break;
    }
    for (const auto& l : labels) domains.push_back(l + "." + suffix);
    for (auto& d : domains)
      if (d != seed && is_valid_dns_name(d)) found.emplace(std::move(d), rule.kind);
  }

  std::vector<CandidateDomain> out;
  out.reserve(found.size());
  for (const auto& [domain, kind] : found)
    out.push_back({domain, CandidateSource::fuzzer, ctx.seed_slug, kind, ctx.first_seen});
  return out;
}

bool is_nft_related(std::string_view label, std::span<const std::string> terms) {
  if (label.empty()) return false;
  const std::string l = to_lower(label);
  return std::any_of(terms.begin(), terms.end(),
                     [&](const std::string& t) { return !t.empty() && l.find(to_lower(t)) != std::string::npos; });
}

DedupeResult dedupe_candidates(std::span<const std::vector<CandidateDomain>> streams) {
  std::map<std::string, CandidateDomain> merged;
  std::size_t total = 0;
  for (const auto& stream : streams) {
    total += stream.size();
    for (const auto& c : stream) {
      auto [it, inserted] = merged.emplace(c.domain, c);
      if (!inserted && it->second.source != CandidateSource::fuzzer && c.source == CandidateSource::fuzzer)
        it->second = c;
    }
  }
  DedupeResult result;
  result.overlap = total - merged.size();
  for (auto& [d, c] : merged) result.candidates.push_back(std::move(c));
  return result;
}

}  // namespace scout
