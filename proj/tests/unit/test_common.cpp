#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "scout/common.hpp"
#include "scout/config.hpp"
#include "scout/html.hpp"
#include "scout/keccak.hpp"
#include "scout/stats.hpp"
#include "scout/url.hpp"

using namespace scout;

TEST(Common, Rfc3339RoundTrip) {
  const auto t = parse_rfc3339("2023-03-01T12:34:56Z");
  EXPECT_EQ(to_epoch(t), 1677674096);
  EXPECT_EQ(format_rfc3339(t), "2023-03-01T12:34:56Z");
  EXPECT_THROW(parse_rfc3339("2023-03-01 12:34"), ParseError);
}

TEST(Common, Dates) {
  EXPECT_EQ(parse_date("1970-01-02"), 1);
  EXPECT_EQ(format_date(parse_date("2022-02-28")), "2022-02-28");
  EXPECT_EQ(day_of(parse_rfc3339("2023-03-01T23:59:59Z")), parse_date("2023-03-01"));
}

TEST(Common, Durations) {
  EXPECT_EQ(parse_duration("30s").count(), 30);
  EXPECT_EQ(parse_duration("10m").count(), 600);
  EXPECT_EQ(parse_duration("168h").count(), 7 * 86400);
  EXPECT_EQ(parse_duration("2d").count(), 2 * 86400);
  EXPECT_EQ(parse_duration("45").count(), 45);
  EXPECT_THROW(parse_duration("ten minutes"), ParseError);
}

TEST(Common, CsvQuotingAndLines) {
  const auto t = CsvTable::parse("a,b\n1,\"x, \"\"y\"\"\"\n\n2,\"multi\nline\"\n3,z\n");
  ASSERT_EQ(t.rows().size(), 3u);
  EXPECT_EQ(t.rows()[0].fields[1], "x, \"y\"");
  EXPECT_EQ(t.rows()[1].fields[1], "multi\nline");
  EXPECT_EQ(t.rows()[2].line, 6u);
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_THROW(t.column("c"), ParseError);
  EXPECT_EQ(csv_line({"a,b", "c\"d", "e"}), "\"a,b\",\"c\"\"d\",e\n");
}

TEST(Common, CsvRaggedRowReportsLine) {
  try {
    CsvTable::parse("a,b\n1,2\n3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Common, Sha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Stats, MedianEvenTakesMeanOfMiddle) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(stats::median(v), 2.5);
  EXPECT_THROW(stats::median(std::vector<double>{}), DataError);
}

TEST(Stats, QuantileMatchesOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 30);
    for (auto& x : v) x = static_cast<double>(rng() % 1000) / 10.0;
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0})
      EXPECT_DOUBLE_EQ(stats::quantile(v, q), oracle::quantile7(v, q));
  }
}

TEST(Stats, IqrFilterExcludesFarOutlier) {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  v.push_back(1e6);
  const auto split = stats::iqr_filter(v);
  EXPECT_EQ(split.excluded, std::vector<std::size_t>{100});
  EXPECT_EQ(split.kept.size(), 100u);
}

TEST(Stats, Ecdf) {
  const std::vector<double> v{3, 1, 1, 2};
  const auto c = stats::ecdf(v);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (std::pair<double, double>{1, 0.5}));
  EXPECT_EQ(c[2], (std::pair<double, double>{3, 1.0}));
}

TEST(Url, ParseAndResolve) {
  const Url u = parse_url("HTTPS://Example.COM:8443/a/b?q=1#frag");
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.host, "example.com");
  EXPECT_EQ(u.port, 8443);
  EXPECT_EQ(u.path, "/a/b?q=1");
  EXPECT_EQ(resolve_url(u, "../c.js").str(), "https://example.com:8443/c.js");
  EXPECT_EQ(resolve_url(u, "/x.js").path, "/x.js");
  EXPECT_EQ(resolve_url(u, "//cdn.example.net/y.js").host, "cdn.example.net");
  EXPECT_THROW(parse_url("https://exa mple.com/"), ParseError);
}

TEST(Url, DnsValidity) {
  EXPECT_TRUE(is_valid_dns_name("a-b.example.com"));
  EXPECT_FALSE(is_valid_dns_name("-ab.com"));
  EXPECT_FALSE(is_valid_dns_name("ab-.com"));
  EXPECT_FALSE(is_valid_dns_name("a_b.com"));
  EXPECT_FALSE(is_valid_dns_name(std::string(64, 'a') + ".com"));
  EXPECT_FALSE(is_valid_dns_name(""));
}

TEST(Url, PublicSuffix) {
  const auto& psl = PublicSuffixList::bundled();
  EXPECT_EQ(psl.registrable_domain("mint.lunarapes.com"), "lunarapes.com");
  EXPECT_EQ(psl.registrable_domain("shop.bakehouse.co.uk"), "bakehouse.co.uk");
  EXPECT_EQ(psl.registrable_domain("co.uk"), std::nullopt);

  const auto custom = PublicSuffixList::parse("com\n*.ck\n!www.ck\n");
  EXPECT_EQ(custom.registrable_domain("a.b.ck"), "a.b.ck");
  EXPECT_EQ(custom.registrable_domain("www.ck"), "www.ck");
  EXPECT_EQ(custom.public_suffix("x.unknowntld"), "unknowntld");
}

TEST(Keccak, KnownDigests) {
  EXPECT_EQ(to_hex(keccak256("")), "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
  EXPECT_EQ(to_hex(sha3_256(std::span<const std::uint8_t>{})),
            "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
}

TEST(Keccak, MatchesReferenceAcrossBlockBoundaries) {
  std::mt19937_64 rng(5);
  for (std::size_t len : {0, 1, 55, 135, 136, 137, 271, 272, 273, 1000}) {
    std::string msg(len, '\0');
    for (auto& c : msg) c = static_cast<char>(rng() & 0xff);
    const auto ours = keccak256(msg);
    const auto ref = oracle::keccak256(msg);
    EXPECT_TRUE(std::equal(ours.begin(), ours.end(), ref.begin())) << "length " << len;
  }
}

TEST(Config, ParseCommentsQuotesAndSections) {
  const auto c = Config::parse(
      "top = 1\n# comment\n[pipeline]\nseed = 7   # trailing\n; also a comment\nname = \"a # b\"\n[fetch]\nmode=fixture\n");
  EXPECT_EQ(c.get("", "top"), "1");
  EXPECT_EQ(c.get("pipeline", "seed"), "7");
  EXPECT_EQ(c.get("pipeline", "name"), "a # b");
  EXPECT_EQ(c.get("fetch", "mode"), "fixture");
  EXPECT_EQ(c.get("fetch", "missing"), std::nullopt);
  EXPECT_EQ(c.get_or("fetch", "missing", "x"), "x");
  EXPECT_THROW(Config::parse("[broken\n"), ParseError);
  EXPECT_THROW(Config::parse("novalue\n"), ParseError);
}

TEST(Config, RoundTripIsEquivalent) {
  const auto c = Config::parse("[a]\nx = 1\ny = \"quoted # value\"\n[b]\nz = path/with spaces\n");
  const auto again = Config::parse(c.serialize());
  EXPECT_TRUE(c.equivalent(again));
  auto changed = again;
  changed.set("a", "x", "2");
  EXPECT_FALSE(c.equivalent(changed));
  changed.erase("a", "x");
  EXPECT_EQ(changed.get("a", "x"), std::nullopt);
}

TEST(Config, MissingFileIsUsageError) { EXPECT_THROW(Config::load("/nonexistent/scout.conf"), UsageError); }

TEST(Html, AnchorsAndStartTags) {
  const std::string doc =
      "<!-- <a href=\"hidden\"> --><A HREF='https://x.com/a'>X <b>link</b></A>"
      "<a class=icon><img alt=\"Twitter\"></a><script src=\"/app.js\"></script>";
  const auto anchors = html::find_anchors(doc);
  ASSERT_EQ(anchors.size(), 2u);
  EXPECT_EQ(anchors[0].href, "https://x.com/a");
  EXPECT_EQ(anchors[0].text, "X link");
  EXPECT_EQ(anchors[1].href, std::nullopt);
  EXPECT_NE(anchors[1].context.find("twitter"), std::string::npos);
  const auto scripts = html::find_start_tags(doc, "SCRIPT");
  ASSERT_EQ(scripts.size(), 1u);
  EXPECT_EQ(scripts[0].attr("src"), "/app.js");
  EXPECT_EQ(html::decode_entities("a&amp;b&quot;"), "a&b\"");
}
