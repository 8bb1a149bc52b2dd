#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scout/common.hpp"
#include "scout/url.hpp"

namespace scout {

enum class RuleKind {
  omission,
  insertion,
  transposition,
  repetition,
  replacement,
  homoglyph,
  bitsquat,
  hyphenation,
  tld_swap,
  term_affix,
};

std::string_view to_string(RuleKind kind);
RuleKind parse_rule_kind(std::string_view name);
// Comma-separated list of rule names; "all" expands to every kind.
std::vector<RuleKind> parse_rule_list(std::string_view csv);

using GlyphTable = std::vector<std::pair<std::string, std::string>>;

// Parses "<from> <to>" lines ('#' comments allowed).
GlyphTable parse_glyph_table(std::string_view text);
const GlyphTable& bundled_glyph_table();

struct PermutationRule {
  RuleKind kind = RuleKind::omission;
  std::vector<std::string> terms;  // term_affix: affix terms; tld_swap: TLDs
  GlyphTable glyphs;               // homoglyph substitutions

  // The rule with its default parameter table.
  static PermutationRule with_defaults(RuleKind kind);
  bool table_driven() const;
};

inline const std::vector<std::string> kDefaultSwapTlds = {"com", "net", "org", "io", "xyz", "app", "finance"};
inline const std::vector<std::string> kDefaultTerms = {"nft", "claim", "mint"};

enum class CandidateSource { fuzzer, ct_stream };
std::string_view to_string(CandidateSource source);

struct CandidateDomain {
  std::string domain;  // lowercase FQDN
  CandidateSource source = CandidateSource::fuzzer;
  std::optional<std::string> seed;  // slug of the imitated collection
  std::optional<RuleKind> rule;
  Timestamp first_seen{};

  friend bool operator==(const CandidateDomain&, const CandidateDomain&) = default;
};

// NDJSON codec; fields in order domain, source, seed, rule, first_seen.
std::string to_json_line(const CandidateDomain& c);
CandidateDomain candidate_from_json(std::string_view line);
std::vector<CandidateDomain> load_candidates(const std::filesystem::path& path);
void save_candidates(const std::filesystem::path& path, std::span<const CandidateDomain> candidates);

struct PermuteContext {
  std::optional<std::string> seed_slug;
  Timestamp first_seen{};
  const PublicSuffixList* psl = nullptr;  // bundled list when null
};

// Squatting candidates for one registrable seed domain. The result is sorted
// by domain, duplicate-free, excludes the seed and contains only DNS-valid
// names. When several rules produce one name, the earliest rule in `rules`
// is recorded. Throws DataError on an invalid seed or parameterless
// table-driven rule.
std::vector<CandidateDomain> permute_domain(std::string_view seed_domain, std::span<const PermutationRule> rules,
                                            const PermuteContext& ctx = {});

// True iff any non-empty term is a substring of the lowercased label.
bool is_nft_related(std::string_view label, std::span<const std::string> terms);

struct DedupeResult {
  std::vector<CandidateDomain> candidates;  // sorted by domain
  std::size_t overlap = 0;                  // sum of input sizes minus union size
};

// Union keyed by domain. On collision fuzzer provenance beats ct_stream;
// otherwise the first occurrence is kept.
DedupeResult dedupe_candidates(std::span<const std::vector<CandidateDomain>> streams);

}  // namespace scout
