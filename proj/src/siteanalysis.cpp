#include "scout/siteanalysis.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <nlohmann/json.hpp>

#include "scout/html.hpp"
#include "scout/keccak.hpp"

namespace scout {

namespace {

struct SourceFile {
  std::string name;
  std::string_view text;
};

std::vector<SourceFile> source_files(const SiteSnapshot& s) {
  std::vector<SourceFile> files{{"page.html", s.html}};
  for (std::size_t i = 0; i < s.scripts.size(); ++i)
    files.push_back({"scripts/" + std::to_string(i) + ".js", s.scripts[i].body});
  return files;
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

// Case-insensitive occurrences of `needle`.
std::vector<std::size_t> find_all_icase(std::string_view text, std::string_view needle) {
  std::vector<std::size_t> hits;
  if (needle.empty() || text.size() < needle.size()) return hits;
  const std::string lower_needle = to_lower(needle);
  for (std::size_t i = 0; i + needle.size() <= text.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() &&
           std::tolower(static_cast<unsigned char>(text[i + k])) == static_cast<unsigned char>(lower_needle[k]))
      ++k;
    if (k == needle.size()) hits.push_back(i);
  }
  return hits;
}

// Call sites of the exact identifier `name` followed by optional whitespace and '('.
std::vector<std::size_t> find_calls(std::string_view text, std::string_view name) {
  std::vector<std::size_t> hits;
  for (auto pos = text.find(name); pos != std::string_view::npos; pos = text.find(name, pos + 1)) {
    if (pos > 0 && ident_char(text[pos - 1])) continue;
    std::size_t j = pos + name.size();
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
    if (j < text.size() && text[j] == '(') hits.push_back(pos);
  }
  return hits;
}

// `value` as an object key: value\s*:
std::vector<std::size_t> find_value_fields(std::string_view text) {
  std::vector<std::size_t> hits;
  for (auto pos = text.find("value"); pos != std::string_view::npos; pos = text.find("value", pos + 1)) {
    if (pos > 0 && (ident_char(text[pos - 1]) || text[pos - 1] == '.')) continue;
    std::size_t j = pos + 5;
    if (j < text.size() && (text[j] == '"' || text[j] == '\'')) ++j;
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
    if (j < text.size() && text[j] == ':') hits.push_back(pos);
  }
  return hits;
}

enum class PatternGroup { wallet_probe, full_rights, transfer, value_send };

struct PatternHit {
  PatternGroup group;
  Evidence evidence;
};

std::vector<PatternHit> scan_patterns(const SiteSnapshot& s) {
  std::vector<PatternHit> hits;
  auto add = [&](PatternGroup g, const SourceFile& f, const std::vector<std::size_t>& offsets, std::string_view label) {
    for (auto off : offsets) hits.push_back({g, {f.name, off, std::string(label)}});
  };
  for (const auto& f : source_files(s)) {
    add(PatternGroup::wallet_probe, f, find_all_icase(f.text, "window.ethereum"), "window.ethereum");
    add(PatternGroup::wallet_probe, f, find_all_icase(f.text, "eth_requestAccounts"), "eth_requestAccounts");
    add(PatternGroup::full_rights, f, find_all_icase(f.text, "setApprovalForAll"), "setApprovalForAll");
    add(PatternGroup::full_rights, f, find_all_icase(f.text, "0xa22cb465"), "0xa22cb465");
    auto transfer_from = find_all_icase(f.text, "transferFrom");
    const auto safe = find_all_icase(f.text, "safeTransferFrom");
    add(PatternGroup::transfer, f, safe, "safeTransferFrom");
    std::erase_if(transfer_from, [&](std::size_t off) {
      return off >= 4 && std::find(safe.begin(), safe.end(), off - 4) != safe.end();
    });
    add(PatternGroup::transfer, f, transfer_from, "transferFrom");
    add(PatternGroup::transfer, f, find_all_icase(f.text, "0x23b872dd"), "0x23b872dd");
    add(PatternGroup::transfer, f, find_all_icase(f.text, "0x42842e0e"), "0x42842e0e");
    add(PatternGroup::transfer, f, find_calls(f.text, "Send"), "Send(");
    add(PatternGroup::value_send, f, find_all_icase(f.text, "sendTransaction"), "sendTransaction");
    add(PatternGroup::value_send, f, find_value_fields(f.text), "value:");
  }
  return hits;
}

bool any_of_group(const std::vector<PatternHit>& hits, PatternGroup g) {
  return std::any_of(hits.begin(), hits.end(), [&](const PatternHit& h) { return h.group == g; });
}

// Role suggested by the nearest keyword in the statement prefix before `offset`.
AddressRole context_role(std::string_view text, std::size_t offset) {
  const std::size_t start = offset > 64 ? offset - 64 : 0;
  std::string window = to_lower(text.substr(start, offset - start));
  if (const auto cut = window.find_last_of(";\n}"); cut != std::string::npos) window.erase(0, cut + 1);
  static constexpr std::pair<std::string_view, AddressRole> kKeywords[] = {
      {"contract", AddressRole::contract}, {"collection", AddressRole::contract}, {"erc721", AddressRole::contract},
      {"erc20", AddressRole::contract},    {"wallet", AddressRole::wallet},       {"receiver", AddressRole::wallet},
      {"recipient", AddressRole::wallet},  {"owner", AddressRole::wallet},        {"payee", AddressRole::wallet},
      {"treasury", AddressRole::wallet},   {"beneficiary", AddressRole::wallet},  {"to:", AddressRole::wallet},
      {"\"to\"", AddressRole::wallet},     {"to =", AddressRole::wallet},
  };
  std::size_t best_pos = 0;
  AddressRole best = AddressRole::unknown;
  for (const auto& [kw, role] : kKeywords) {
    const auto pos = window.rfind(kw);
    if (pos == std::string::npos) continue;
    if (kw.front() == 't' && pos > 0 && ident_char(window[pos - 1])) continue;
    if (best == AddressRole::unknown || pos + kw.size() > best_pos) {
      best_pos = pos + kw.size();
      best = role;
    }
  }
  return best;
}

AddressRole infer_role(const AddressHit& hit, const SiteSnapshot& s, const CollectionRegistry& reg) {
  if (reg.find_contract(hit.address.lower())) return AddressRole::contract;
  const auto files = source_files(s);
  bool wallet = false;
  for (const auto& loc : hit.locations) {
    const auto it = std::find_if(files.begin(), files.end(), [&](const SourceFile& f) { return f.name == loc.file; });
    if (it == files.end()) continue;
    const auto role = context_role(it->text, loc.offset);
    if (role == AddressRole::contract) return AddressRole::contract;
    wallet = wallet || role == AddressRole::wallet;
  }
  return wallet ? AddressRole::wallet : AddressRole::unknown;
}

std::string twitter_handle_from(const Url& u) {
  const auto segs = split(u.path.substr(1, u.path.find('?') == std::string::npos ? std::string::npos : u.path.find('?') - 1), '/');
  if (segs.empty() || segs[0].empty()) return {};
  static const char* kReserved[] = {"intent", "share", "home", "i", "hashtag", "search", "explore", "login", "signup"};
  for (const char* r : kReserved)
    if (iequals(segs[0], r)) return {};
  std::string h = segs[0];
  if (!h.empty() && h.front() == '@') h.erase(h.begin());
  return h;
}

std::string opensea_slug_from(const Url& u) {
  const auto segs = split(u.path.substr(1, u.path.find('?') == std::string::npos ? std::string::npos : u.path.find('?') - 1), '/');
  for (std::size_t i = 0; i + 1 < segs.size(); ++i)
    if (iequals(segs[i], "collection")) return segs[i + 1];
  return {};
}

std::string strip_www(const std::string& host) {
  for (const char* p : {"www.", "mobile.", "m."})
    if (host.rfind(p, 0) == 0) return host.substr(std::string_view(p).size());
  return host;
}

bool is_empty_href(const std::optional<std::string>& href) {
  if (!href) return true;
  std::string h = to_lower(trim(*href));
  std::erase(h, ' ');
  return h.empty() || h == "#" || h == "javascript:void(0)" || h == "javascript:void(0);" || h == "javascript:;" ||
         h == "javascript:void(0)" || h == "javascript:";
}

}  // namespace

std::string_view to_string(AddressCasing c) {
  switch (c) {
    case AddressCasing::all_lower: return "all_lower";
    case AddressCasing::all_upper: return "all_upper";
    case AddressCasing::mixed: return "mixed";
  }
  return "mixed";
}

std::string_view to_string(AddressRole r) {
  switch (r) {
    case AddressRole::unknown: return "unknown";
    case AddressRole::wallet: return "wallet";
    case AddressRole::contract: return "contract";
  }
  return "unknown";
}

std::string_view to_string(LinkClass c) {
  switch (c) {
    case LinkClass::empty: return "empty";
    case LinkClass::official: return "official";
    case LinkClass::unofficial: return "unofficial";
  }
  return "unofficial";
}

std::string_view to_string(AttackVector v) {
  switch (v) {
    case AttackVector::none: return "none";
    case AttackVector::fund_transfer: return "fund_transfer";
    case AttackVector::token_steal: return "token_steal";
  }
  return "none";
}

AttackVector parse_attack_vector(std::string_view text) {
  if (text == "none") return AttackVector::none;
  if (text == "fund_transfer") return AttackVector::fund_transfer;
  if (text == "token_steal") return AttackVector::token_steal;
  throw ParseError("unknown attack vector '" + std::string(text) + "'");
}

std::string ChainAddress::lower() const { return to_lower(hex); }

ChainAddress make_chain_address(std::string_view hex) {
  if (!is_chain_address(hex)) throw DataError("malformed chain address '" + std::string(hex) + "'");
  ChainAddress a;
  a.hex = std::string(hex);
  bool lower = false, upper = false;
  for (char c : hex.substr(2)) {
    lower = lower || (c >= 'a' && c <= 'f');
    upper = upper || (c >= 'A' && c <= 'F');
  }
  a.casing = lower && upper ? AddressCasing::mixed : upper ? AddressCasing::all_upper : AddressCasing::all_lower;
  if (a.casing == AddressCasing::mixed) a.checksum_valid = checksum_encode(hex) == hex;
  return a;
}

std::string checksum_encode(std::string_view hex) {
  const std::string body = to_lower(normalize_address(hex).substr(2));
  const auto digest = keccak256(body);
  std::string out = "0x";
  for (std::size_t i = 0; i < body.size(); ++i) {
    const std::uint8_t nibble = i % 2 == 0 ? digest[i / 2] >> 4 : digest[i / 2] & 0x0f;
    const char c = body[i];
    out.push_back(c >= 'a' && c <= 'f' && nibble >= 8 ? static_cast<char>(c - 'a' + 'A') : c);
  }
  return out;
}

bool validate_checksum(const ChainAddress& address) {
  const ChainAddress fresh = make_chain_address(address.hex);
  if (fresh.casing != AddressCasing::mixed) return true;
  return checksum_encode(address.hex) == address.hex;
}

std::vector<AddressHit> extract_chain_addresses(std::string_view text, std::string_view file) {
  std::map<std::string, AddressHit> found;
  for (auto pos = text.find("0x"); pos != std::string_view::npos; pos = text.find("0x", pos + 1)) {
    if (pos > 0 && is_hex_digit(text[pos - 1])) continue;
    std::size_t end = pos + 2;
    while (end < text.size() && is_hex_digit(text[end])) ++end;
    if (end - pos - 2 != 40) continue;
    const std::string_view spelled = text.substr(pos, 42);
    auto& hit = found[to_lower(spelled)];
    if (hit.occurrences == 0 || spelled < std::string_view(hit.address.hex)) hit.address = make_chain_address(spelled);
    ++hit.occurrences;
    hit.locations.push_back({std::string(file), pos, "chain-address"});
  }
  std::vector<AddressHit> out;
  for (auto& [k, v] : found) out.push_back(std::move(v));
  return out;
}

std::vector<AddressHit> extract_chain_addresses(const SiteSnapshot& snapshot) {
  std::map<std::string, AddressHit> merged;
  for (const auto& f : source_files(snapshot)) {
    for (auto& hit : extract_chain_addresses(f.text, f.name)) {
      auto [it, inserted] = merged.emplace(hit.address.lower(), hit);
      if (inserted) continue;
      auto& m = it->second;
      if (hit.address.hex < m.address.hex) m.address = hit.address;
      m.occurrences += hit.occurrences;
      m.locations.insert(m.locations.end(), hit.locations.begin(), hit.locations.end());
    }
  }
  std::vector<AddressHit> out;
  for (auto& [k, v] : merged) {
    std::sort(v.locations.begin(), v.locations.end(),
              [](const Evidence& a, const Evidence& b) { return std::tie(a.file, a.offset) < std::tie(b.file, b.offset); });
    out.push_back(std::move(v));
  }
  return out;
}

LinkAudit audit_links(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                      const std::optional<CollectionRecord>& claimed) {
  // Prefer the registry's current entry for the claimed collection.
  std::optional<CollectionRecord> entry = claimed;
  if (claimed)
    if (const auto* r = reg.find_slug(claimed->slug)) entry = *r;

  LinkAudit audit;
  for (const auto& a : html::find_anchors(snapshot.html)) {
    if (is_empty_href(a.href)) {
      const std::string ctx = to_lower(a.text) + " " + a.context;
      const std::string href = a.href ? trim(*a.href) : "";
      if (ctx.find("twitter") != std::string::npos)
        audit.twitter_links.push_back({href, LinkClass::empty, std::nullopt, a.offset});
      else if (ctx.find("opensea") != std::string::npos)
        audit.opensea_links.push_back({href, LinkClass::empty, std::nullopt, a.offset});
      continue;
    }
    const std::string href = trim(*a.href);
    Url u;
    try {
      if (href.find("://") == std::string::npos && href.rfind("//", 0) != 0) continue;
      u = href.rfind("//", 0) == 0 ? parse_url("https:" + href) : parse_url(href);
    } catch (const ParseError&) {
      continue;
    }
    const std::string host = strip_www(u.host);
    if (host == "twitter.com" || host == "x.com") {
      const std::string handle = twitter_handle_from(u);
      LinkEntry e{href, LinkClass::unofficial, std::nullopt, a.offset};
      if (!handle.empty()) e.handle = handle;
      if (!handle.empty() && entry && entry->twitter_handle && iequals(*entry->twitter_handle, handle))
        e.classification = LinkClass::official;
      audit.twitter_links.push_back(std::move(e));
    } else if (host == "opensea.io") {
      const std::string slug = opensea_slug_from(u);
      LinkEntry e{href, LinkClass::unofficial, std::nullopt, a.offset};
      if (!slug.empty()) e.handle = slug;
      if (!slug.empty() && entry && entry->opensea_slug && iequals(*entry->opensea_slug, slug))
        e.classification = LinkClass::official;
      audit.opensea_links.push_back(std::move(e));
    }
  }
  const auto hits = scan_patterns(snapshot);
  audit.has_wallet_connect = any_of_group(hits, PatternGroup::wallet_probe);
  audit.requests_full_rights = any_of_group(hits, PatternGroup::full_rights);
  return audit;
}

AttackVectorReport classify_attack_vector(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                                          const AnalysisConfig& cfg) {
  AttackVectorReport report;
  const auto addresses = extract_chain_addresses(snapshot);
  const auto hits = scan_patterns(snapshot);

  for (const auto& hit : addresses) {
    ChainAddress a = hit.address;
    a.role_hint = infer_role(hit, snapshot, reg);
    if (reg.find_contract(a.lower())) {
      ++report.embedded_contract_count;
      for (const auto& loc : hit.locations) report.evidence.push_back({loc.file, loc.offset, "registry-contract"});
    } else if (a.role_hint != AddressRole::contract) {
      for (const auto& loc : hit.locations) report.evidence.push_back({loc.file, loc.offset, "wallet-address"});
      report.wallet_addresses.push_back(std::move(a));
    }
  }
  for (const auto& h : hits) report.evidence.push_back(h.evidence);
  std::sort(report.evidence.begin(), report.evidence.end(), [](const Evidence& a, const Evidence& b) {
    return std::tie(a.file, a.offset, a.pattern) < std::tie(b.file, b.offset, b.pattern);
  });

  const bool moves_tokens = any_of_group(hits, PatternGroup::transfer) || any_of_group(hits, PatternGroup::full_rights);
  const bool token_steal = report.embedded_contract_count >= cfg.min_embedded_contracts && moves_tokens;
  const bool fund_transfer = any_of_group(hits, PatternGroup::wallet_probe) && !report.wallet_addresses.empty() &&
                             any_of_group(hits, PatternGroup::value_send);
  if (token_steal) {
    report.vector = AttackVector::token_steal;
    report.dual_evidence = fund_transfer;
  } else if (fund_transfer) {
    report.vector = AttackVector::fund_transfer;
  }
  return report;
}

std::optional<CollectionRecord> resolve_claimed(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                                                const std::optional<std::string>& seed_slug) {
  if (seed_slug)
    if (const auto* r = reg.find_slug(*seed_slug)) return *r;
  try {
    return match_official(snapshot.url, reg);
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

SiteAnalysis analyze_site(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                          const std::optional<std::string>& seed_slug, const AnalysisConfig& cfg) {
  SiteAnalysis a;
  a.snapshot_id = snapshot.snapshot_id.empty() ? compute_snapshot_id(snapshot) : snapshot.snapshot_id;
  a.url = snapshot.url;
  const auto claimed = resolve_claimed(snapshot, reg, seed_slug);
  if (claimed) a.claimed_slug = claimed->slug;
  a.addresses = extract_chain_addresses(snapshot);
  for (auto& hit : a.addresses) hit.address.role_hint = infer_role(hit, snapshot, reg);
  a.links = audit_links(snapshot, reg, claimed);
  a.attack = classify_attack_vector(snapshot, reg, cfg);
  return a;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson to_json(const ChainAddress& a) {
  ojson j;
  j["hex"] = a.hex;
  j["casing"] = to_string(a.casing);
  j["checksum_valid"] = a.checksum_valid ? ojson(*a.checksum_valid) : ojson(nullptr);
  j["role_hint"] = to_string(a.role_hint);
  return j;
}

ChainAddress address_from_json(const nlohmann::json& j) {
  ChainAddress a = make_chain_address(j.at("hex").get<std::string>());
  const std::string role = j.value("role_hint", "unknown");
  a.role_hint = role == "wallet" ? AddressRole::wallet : role == "contract" ? AddressRole::contract : AddressRole::unknown;
  return a;
}

ojson to_json(const Evidence& e) { return ojson{{"file", e.file}, {"offset", e.offset}, {"pattern", e.pattern}}; }

Evidence evidence_from_json(const nlohmann::json& j) {
  return {j.at("file").get<std::string>(), j.at("offset").get<std::size_t>(), j.at("pattern").get<std::string>()};
}

ojson to_json(const LinkEntry& e) {
  ojson j;
  j["href"] = e.href;
  j["classification"] = to_string(e.classification);
  j["handle"] = e.handle ? ojson(*e.handle) : ojson(nullptr);
  j["offset"] = e.offset;
  return j;
}

LinkEntry link_from_json(const nlohmann::json& j) {
  LinkEntry e;
  e.href = j.at("href").get<std::string>();
  const std::string c = j.at("classification").get<std::string>();
  e.classification = c == "empty" ? LinkClass::empty : c == "official" ? LinkClass::official : LinkClass::unofficial;
  if (j.contains("handle") && j["handle"].is_string()) e.handle = j["handle"].get<std::string>();
  e.offset = j.value("offset", std::size_t{0});
  return e;
}

}  // namespace

std::string to_json_line(const SiteAnalysis& a) {
  ojson j;
  j["snapshot_id"] = a.snapshot_id;
  j["url"] = a.url;
  j["claimed"] = a.claimed_slug ? ojson(*a.claimed_slug) : ojson(nullptr);
  ojson addrs = ojson::array();
  for (const auto& h : a.addresses) {
    ojson e = to_json(h.address);
    e["occurrences"] = h.occurrences;
    ojson locs = ojson::array();
    for (const auto& l : h.locations) locs.push_back(to_json(l));
    e["locations"] = std::move(locs);
    addrs.push_back(std::move(e));
  }
  j["addresses"] = std::move(addrs);
  ojson links;
  links["twitter_links"] = ojson::array();
  for (const auto& e : a.links.twitter_links) links["twitter_links"].push_back(to_json(e));
  links["opensea_links"] = ojson::array();
  for (const auto& e : a.links.opensea_links) links["opensea_links"].push_back(to_json(e));
  links["has_wallet_connect"] = a.links.has_wallet_connect;
  links["requests_full_rights"] = a.links.requests_full_rights;
  j["link_audit"] = std::move(links);
  ojson attack;
  attack["vector"] = to_string(a.attack.vector);
  attack["embedded_contract_count"] = a.attack.embedded_contract_count;
  attack["dual_evidence"] = a.attack.dual_evidence;
  attack["wallet_addresses"] = ojson::array();
  for (const auto& w : a.attack.wallet_addresses) attack["wallet_addresses"].push_back(to_json(w));
  attack["evidence"] = ojson::array();
  for (const auto& e : a.attack.evidence) attack["evidence"].push_back(to_json(e));
  j["attack"] = std::move(attack);
  return j.dump();
}

SiteAnalysis analysis_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    SiteAnalysis a;
    a.snapshot_id = j.at("snapshot_id").get<std::string>();
    a.url = j.at("url").get<std::string>();
    if (j.contains("claimed") && j["claimed"].is_string()) a.claimed_slug = j["claimed"].get<std::string>();
    for (const auto& e : j.at("addresses")) {
      AddressHit h;
      h.address = address_from_json(e);
      h.occurrences = e.at("occurrences").get<std::size_t>();
      for (const auto& l : e.at("locations")) h.locations.push_back(evidence_from_json(l));
      a.addresses.push_back(std::move(h));
    }
    const auto& links = j.at("link_audit");
    for (const auto& e : links.at("twitter_links")) a.links.twitter_links.push_back(link_from_json(e));
    for (const auto& e : links.at("opensea_links")) a.links.opensea_links.push_back(link_from_json(e));
    a.links.has_wallet_connect = links.at("has_wallet_connect").get<bool>();
    a.links.requests_full_rights = links.at("requests_full_rights").get<bool>();
    const auto& attack = j.at("attack");
    a.attack.vector = parse_attack_vector(attack.at("vector").get<std::string>());
    a.attack.embedded_contract_count = attack.at("embedded_contract_count").get<std::size_t>();
    a.attack.dual_evidence = attack.value("dual_evidence", false);
    for (const auto& w : attack.at("wallet_addresses")) a.attack.wallet_addresses.push_back(address_from_json(w));
    for (const auto& e : attack.at("evidence")) a.attack.evidence.push_back(evidence_from_json(e));
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed analysis record: ") + e.what());
  }
}

std::vector<SiteAnalysis> load_analyses(const std::filesystem::path& path) {
  std::vector<SiteAnalysis> out;
  std::size_t n = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(analysis_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

}  // namespace scout
