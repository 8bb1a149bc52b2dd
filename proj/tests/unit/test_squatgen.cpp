#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "scout/squatgen.hpp"

using namespace scout;

namespace {

std::set<std::string> domains(const std::vector<CandidateDomain>& cands) {
  std::set<std::string> out;
  for (const auto& c : cands) out.insert(c.domain);
  return out;
}

std::vector<PermutationRule> rules_of(std::initializer_list<RuleKind> kinds) {
  std::vector<PermutationRule> out;
  for (auto k : kinds) out.push_back(PermutationRule::with_defaults(k));
  return out;
}

}  // namespace

TEST(Squatgen, Omission) {
  EXPECT_EQ(domains(permute_domain("abc.com", rules_of({RuleKind::omission}))),
            (std::set<std::string>{"ab.com", "ac.com", "bc.com"}));
}

TEST(Squatgen, Transposition) {
  EXPECT_EQ(domains(permute_domain("abc.com", rules_of({RuleKind::transposition}))),
            (std::set<std::string>{"bac.com", "acb.com"}));
}

// Oracle: every term at each of the four affix positions.
TEST(Squatgen, TermAffixPositions) {
  PermutationRule rule{RuleKind::term_affix, {"nft", "mint", "claim"}, {}};
  const auto got = domains(permute_domain("azuki.com", std::vector{rule}));
  std::set<std::string> expect;
  for (const std::string t : {"nft", "mint", "claim"})
    for (const auto& d : {t + "azuki", "azuki" + t, t + "-azuki", "azuki-" + t}) expect.insert(d + ".com");
  EXPECT_EQ(got, expect);
  EXPECT_TRUE(got.count("azukinft.com") && got.count("mintazuki.com") && got.count("azuki-claim.com"));
}

TEST(Squatgen, TldSwapAndHyphenation) {
  const auto swapped = domains(permute_domain("azuki.com", rules_of({RuleKind::tld_swap})));
  EXPECT_TRUE(swapped.count("azuki.io"));
  EXPECT_FALSE(swapped.count("azuki.com"));
  const auto hy = domains(permute_domain("abc.com", rules_of({RuleKind::hyphenation})));
  EXPECT_EQ(hy, (std::set<std::string>{"a-bc.com", "ab-c.com"}));
}

TEST(Squatgen, HomoglyphUsesTable) {
  PermutationRule rule{RuleKind::homoglyph, {}, {{"l", "1"}, {"m", "rn"}}};
  EXPECT_EQ(domains(permute_domain("lm.com", std::vector{rule})),
            (std::set<std::string>{"1m.com", "lrn.com"}));
  EXPECT_FALSE(bundled_glyph_table().empty());
}

TEST(Squatgen, BitsquatStaysInDnsCharset) {
  for (const auto& c : permute_domain("azuki.com", rules_of({RuleKind::bitsquat}))) {
    EXPECT_TRUE(is_valid_dns_name(c.domain)) << c.domain;
    EXPECT_EQ(c.rule, RuleKind::bitsquat);
  }
}

TEST(Squatgen, FirstRuleInListIsRecorded) {
  // "ab.com" comes from omission and also from nothing else here; "aab.com" from insertion and repetition.
  const auto cands = permute_domain("ab.com", rules_of({RuleKind::repetition, RuleKind::insertion}));
  for (const auto& c : cands)
    if (c.domain == "aab.com") EXPECT_EQ(c.rule, RuleKind::repetition);
}

TEST(Squatgen, Errors) {
  EXPECT_THROW(permute_domain("not valid", rules_of({RuleKind::omission})), DataError);
  PermutationRule empty{RuleKind::term_affix, {}, {}};
  EXPECT_THROW(permute_domain("azuki.com", std::vector{empty}), DataError);
  EXPECT_THROW(parse_rule_kind("typo"), ParseError);
  EXPECT_EQ(parse_rule_list("all").size(), 10u);
}

TEST(Squatgen, IsNftRelated) {
  const std::vector<std::string> terms = kDefaultTerms;
  EXPECT_TRUE(is_nft_related("freemint-apes.xyz", terms));
  EXPECT_FALSE(is_nft_related("example.com", terms));
  EXPECT_TRUE(is_nft_related("NFTdrop.io", terms));
  EXPECT_FALSE(is_nft_related("", terms));
}

TEST(Squatgen, Dedupe) {
  auto c = [](std::string d, CandidateSource s) {
    CandidateDomain x;
    x.domain = std::move(d);
    x.source = s;
    return x;
  };
  const std::vector<std::vector<CandidateDomain>> two{{c("a", CandidateSource::ct_stream), c("b", CandidateSource::ct_stream)},
                                                      {c("b", CandidateSource::fuzzer), c("c", CandidateSource::fuzzer)}};
  const auto r = dedupe_candidates(two);
  EXPECT_EQ(r.candidates.size(), 3u);
  EXPECT_EQ(r.overlap, 1u);
  EXPECT_EQ(r.candidates[1].source, CandidateSource::fuzzer);

  const std::vector<std::vector<CandidateDomain>> disjoint{{c("a", CandidateSource::fuzzer)}, {c("b", CandidateSource::fuzzer)}};
  EXPECT_EQ(dedupe_candidates(disjoint).overlap, 0u);
  const std::vector<std::vector<CandidateDomain>> same{two[0], two[0]};
  EXPECT_EQ(dedupe_candidates(same).overlap, 2u);
  EXPECT_EQ(dedupe_candidates(same).candidates.size(), 2u);
}

TEST(Squatgen, CandidateJsonRoundTrip) {
  CandidateDomain c;
  c.domain = "azukinft.com";
  c.seed = "azuki";
  c.rule = RuleKind::term_affix;
  c.first_seen = parse_rfc3339("2023-03-01T00:00:00Z");
  EXPECT_EQ(candidate_from_json(to_json_line(c)), c);
  EXPECT_THROW(candidate_from_json("{\"domain\":1}"), ParseError);
}

// Random seeds: output excludes the seed, is DNS-valid, sorted and duplicate-free.
TEST(SquatgenProperty, RandomSeeds) {
  std::mt19937_64 rng(9);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-";
  const std::vector<std::string> tlds = {"com", "io", "xyz", "co.uk"};
  std::vector<PermutationRule> all;
  for (auto k : parse_rule_list("all")) all.push_back(PermutationRule::with_defaults(k));
  for (int trial = 0; trial < 150; ++trial) {
    std::string label;
    const std::size_t len = 1 + rng() % 15;
    while (label.size() < len) {
      const char ch = alphabet[rng() % alphabet.size()];
      if (ch == '-' && (label.empty() || label.size() + 1 == len)) continue;
      label += ch;
    }
    const std::string seed = label + "." + tlds[rng() % tlds.size()];
    const auto cands = permute_domain(seed, all);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      EXPECT_NE(cands[i].domain, seed);
      EXPECT_TRUE(is_valid_dns_name(cands[i].domain)) << cands[i].domain;
      EXPECT_TRUE(seen.insert(cands[i].domain).second);
      if (i > 0) EXPECT_LT(cands[i - 1].domain, cands[i].domain);
    }
    // Rule order does not change the set.
    auto reversed = all;
    std::reverse(reversed.begin(), reversed.end());
    EXPECT_EQ(domains(permute_domain(seed, reversed)), seen);
  }
}

TEST(SquatgenProperty, OmissionCountEqualsLabelLength) {
  for (const std::string label : {"a1", "xyz", "qwertyuiop", "abcdefghijklmnopqrstuvwxyz"})
    EXPECT_EQ(permute_domain(label + ".io", rules_of({RuleKind::omission})).size(), label.size());
}
