#include "scout/ctingest.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace scout {

namespace {

Timestamp epoch_field(const nlohmann::json& v, const char* name) {
  if (v.is_number_integer()) return from_epoch(v.get<std::int64_t>());
  if (v.is_number()) return from_epoch(static_cast<std::int64_t>(std::floor(v.get<double>())));
  throw ParseError(std::string("field '") + name + "' is not an epoch number");
}

}  // namespace

CtRecord parse_ct_record(std::string_view line, std::optional<Timestamp> received_at) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ParseError("malformed JSON");
  }
  if (!j.is_object() || !j.contains("data") || !j["data"].is_object()) throw ParseError("missing field 'data'");
  const auto& data = j["data"];
  if (!data.contains("leaf_cert") || !data["leaf_cert"].is_object())
    throw ParseError("missing field 'data.leaf_cert'");
  const auto& leaf = data["leaf_cert"];
  if (!leaf.contains("all_domains") || !leaf["all_domains"].is_array())
    throw ParseError("missing field 'data.leaf_cert.all_domains'");
  if (!leaf.contains("not_before")) throw ParseError("missing field 'data.leaf_cert.not_before'");

  CtRecord r;
  std::unordered_set<std::string> seen;
  for (const auto& d : leaf["all_domains"]) {
    if (!d.is_string()) throw ParseError("non-string entry in 'data.leaf_cert.all_domains'");
    std::string name = to_lower(trim(d.get<std::string>()));
    while (name.rfind("*.", 0) == 0) name.erase(0, 2);
    if (!name.empty() && name.back() == '.') name.pop_back();
    if (name.empty()) continue;
    if (seen.insert(name).second) r.all_domains.push_back(std::move(name));
  }
  if (r.all_domains.empty()) throw ParseError("empty 'data.leaf_cert.all_domains'");
  r.not_before = epoch_field(leaf["not_before"], "data.leaf_cert.not_before");
  if (leaf.contains("issuer") && leaf["issuer"].is_object() && leaf["issuer"].contains("O") &&
      leaf["issuer"]["O"].is_string())
    r.issuer = leaf["issuer"]["O"].get<std::string>();
  if (data.contains("seen") && !data["seen"].is_null()) {
    r.seen_at = epoch_field(data["seen"], "data.seen");
  } else {
    r.seen_at = received_at.value_or(r.not_before);
  }
  if (r.not_before > r.seen_at + kCtClockSkew)
    throw ParseError("'data.leaf_cert.not_before' is later than receipt time plus clock skew");
  return r;
}

std::string serialize_ct_record(const CtRecord& record) {
  nlohmann::ordered_json leaf;
  leaf["all_domains"] = record.all_domains;
  leaf["not_before"] = to_epoch(record.not_before);
  leaf["issuer"] = {{"O", record.issuer}};
  nlohmann::ordered_json data;
  data["leaf_cert"] = std::move(leaf);
  data["seen"] = to_epoch(record.seen_at);
  nlohmann::ordered_json j;
  j["data"] = std::move(data);
  return j.dump();
}

CtWatch CtWatch::from(std::span<const CandidateDomain> candidates, std::vector<std::string> terms) {
  CtWatch w;
  for (const auto& c : candidates) w.candidates.emplace(c.domain, c);
  for (auto& t : terms) t = to_lower(trim(t));
  w.terms = std::move(terms);
  return w;
}

CtStreamFilter::CtStreamFilter(CtWatch watch, Timestamp since) : watch_(std::move(watch)), since_(since) {}

void CtStreamFilter::consume(const CtRecord& record, std::vector<CandidateDomain>& out) {
  ++stats_.records;
  if (record.not_before < since_) return;
  for (const auto& domain : record.all_domains) {
    if (emitted_.count(domain)) continue;
    const auto hit = watch_.candidates.find(domain);
    const bool watched = hit != watch_.candidates.end();
    if (!watched && !is_nft_related(domain, watch_.terms)) continue;
    CandidateDomain c;
    c.domain = domain;
    c.source = CandidateSource::ct_stream;
    if (watched) {
      c.seed = hit->second.seed;
      c.rule = hit->second.rule;
    }
    c.first_seen = record.seen_at;
    emitted_.insert(domain);
    ++stats_.emitted;
    out.push_back(std::move(c));
  }
}

bool CtStreamFilter::consume_line(std::string_view line, std::vector<CandidateDomain>& out,
                                  std::optional<Timestamp> received_at) {
  if (trim(line).empty()) return true;
  ++stats_.lines;
  CtRecord record;
  try {
    record = parse_ct_record(line, received_at);
  } catch (const ParseError&) {
    ++stats_.malformed;
    return false;
  }
  consume(record, out);
  return true;
}

std::vector<CandidateDomain> filter_stream(std::span<const CtRecord> records, const CtWatch& watch, Timestamp since) {
  CtStreamFilter filter(watch, since);
  std::vector<CandidateDomain> out;
  for (const auto& r : records) filter.consume(r, out);
  return out;
}

}  // namespace scout
