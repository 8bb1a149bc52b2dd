#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scout/common.hpp"
#include "scout/squatgen.hpp"

namespace scout {

// Certificates may be stamped slightly ahead of the receiving clock.
inline constexpr Seconds kCtClockSkew{300};

struct CtRecord {
  std::vector<std::string> all_domains;  // lowercased, wildcard-stripped, unique, in certificate order
  Timestamp not_before{};
  std::string issuer;
  Timestamp seen_at{};

  friend bool operator==(const CtRecord&, const CtRecord&) = default;
};

// Parses one firehose message:
//   {"data":{"leaf_cert":{"all_domains":[...],"not_before":<epoch>,"issuer":{"O":"..."}},"seen":<epoch>}}
// `data.seen` (optional) becomes seen_at; otherwise `received_at`, otherwise
// not_before. Throws ParseError naming the offending field.
CtRecord parse_ct_record(std::string_view line, std::optional<Timestamp> received_at = std::nullopt);
std::string serialize_ct_record(const CtRecord& record);

struct CtWatch {
  // Known squat candidates by domain; matching hits inherit their seed.
  std::unordered_map<std::string, CandidateDomain> candidates;
  std::vector<std::string> terms;

  static CtWatch from(std::span<const CandidateDomain> candidates, std::vector<std::string> terms);
};

struct CtFilterStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t records = 0;
  std::size_t emitted = 0;
};

// Stateful single-stream filter: emits each qualifying domain once, in
// stream order.
class CtStreamFilter {
 public:
  CtStreamFilter(CtWatch watch, Timestamp since);

  // Appends hits for one record to `out`.
  void consume(const CtRecord& record, std::vector<CandidateDomain>& out);
  // Parses and consumes one NDJSON line; malformed lines are counted and skipped.
  // Returns false for a malformed line.
  bool consume_line(std::string_view line, std::vector<CandidateDomain>& out,
                    std::optional<Timestamp> received_at = std::nullopt);

  const CtFilterStats& stats() const { return stats_; }

 private:
  CtWatch watch_;
  Timestamp since_;
  std::unordered_set<std::string> emitted_;
  CtFilterStats stats_;
};

// Domains with not_before >= since that are watched candidates or contain a
// watch term; first occurrence wins.
std::vector<CandidateDomain> filter_stream(std::span<const CtRecord> records, const CtWatch& watch, Timestamp since);

}  // namespace scout
