#include "scout/features.hpp"

#include <algorithm>
#include <charconv>

namespace scout {

namespace {

std::uint64_t parse_count(const std::string& text, std::size_t line, std::string_view what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw ParseError("bad " + std::string(what) + " '" + text + "'", line);
  return v;
}

bool parse_flag(const std::string& text, std::size_t line, std::string_view what) {
  if (text == "1") return true;
  if (text == "0") return false;
  throw ParseError("bad " + std::string(what) + " '" + text + "' (expected 0 or 1)", line);
}

}  // namespace

std::string_view to_string(Label l) { return l == Label::phishing ? "phishing" : "benign"; }

Label parse_label(std::string_view text) {
  if (text == "phishing" || text == "1") return Label::phishing;
  if (text == "benign" || text == "0") return Label::benign;
  throw ParseError("unknown label '" + std::string(text) + "'");
}

FixtureAccountProvider FixtureAccountProvider::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

FixtureAccountProvider FixtureAccountProvider::parse(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  table.require_header({"handle", "exists", "active", "followers", "created_at"});
  FixtureAccountProvider p;
  for (const auto& row : table.rows()) {
    AccountInfo a;
    a.handle = row.fields[0];
    if (!a.handle.empty() && a.handle.front() == '@') a.handle.erase(a.handle.begin());
    try {
      a.exists = parse_bool(row.fields[1]);
      a.active = parse_bool(row.fields[2]);
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    }
    a.followers = parse_count(row.fields[3], row.line, "followers");
    if (!row.fields[4].empty()) {
      try {
        a.created_at = parse_rfc3339(row.fields[4]);
      } catch (const Error& e) {
        throw ParseError(e.what(), row.line);
      }
    }
    if (!a.exists && (a.active || a.followers != 0))
      throw ParseError("account '" + a.handle + "' does not exist but is active or has followers", row.line);
    if (!p.accounts_.emplace(to_lower(a.handle), a).second)
      throw ParseError("duplicate account '" + a.handle + "'", row.line);
  }
  return p;
}

std::optional<AccountInfo> FixtureAccountProvider::lookup(std::string_view handle, Timestamp as_of) const {
  const auto it = accounts_.find(to_lower(handle));
  if (it == accounts_.end()) return std::nullopt;
  AccountInfo a = it->second;
  a.fetched_at = as_of;
  return a;
}

FixtureNameProvider FixtureNameProvider::load(const std::filesystem::path& path) { return parse(read_file(path)); }

FixtureNameProvider FixtureNameProvider::parse(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  table.require_header({"contract_address", "name"});
  FixtureNameProvider p;
  for (const auto& row : table.rows()) {
    std::string addr;
    try {
      addr = normalize_address(row.fields[0]);
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    }
    if (!p.names_.emplace(addr, row.fields[1]).second)
      throw ParseError("duplicate contract '" + row.fields[0] + "'", row.line);
  }
  return p;
}

std::optional<std::string> FixtureNameProvider::name_of(std::string_view address) const {
  const auto it = names_.find(to_lower(address));
  if (it == names_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::array<double, kFeatureCount> FeatureVector::values() const {
  return {f1_url_matches_known ? 1.0 : 0.0,
          f2_contract_matches_known ? 1.0 : 0.0,
          static_cast<double>(f3_eth_address_count),
          f4_has_twitter_link ? 1.0 : 0.0,
          f5_twitter_active ? 1.0 : 0.0,
          f6_twitter_is_known ? 1.0 : 0.0,
          f7_opensea_is_known ? 1.0 : 0.0,
          static_cast<double>(f8_twitter_followers),
          f9_twitter_age_days,
          f10_contract_name_resolvable ? 1.0 : 0.0};
}

FeatureResult extract_features(const SiteSnapshot& snapshot, const SiteAnalysis& analysis, const CollectionRegistry& reg,
                               const AccountProvider& accounts, const ContractNameProvider& names,
                               const FeatureConfig& cfg) {
  FeatureResult out;
  FeatureVector& f = out.features;

  try {
    f.f1_url_matches_known = match_official(snapshot.url, reg).has_value();
  } catch (const ParseError& e) {
    out.provenance.push_back({"f1", e.what()});
  }

  f.f3_eth_address_count = analysis.addresses.size();
  for (const auto& hit : analysis.addresses) {
    const std::string addr = hit.address.lower();
    if (reg.find_contract(addr)) f.f2_contract_matches_known = f.f10_contract_name_resolvable = true;
    if (!f.f10_contract_name_resolvable && names.name_of(addr)) f.f10_contract_name_resolvable = true;
  }

  const LinkEntry* first = nullptr;
  for (const auto& link : analysis.links.twitter_links) {
    if (link.classification == LinkClass::empty) continue;
    f.f4_has_twitter_link = true;
    if (!first) first = &link;
    if (link.classification == LinkClass::official) f.f6_twitter_is_known = true;
  }
  f.f7_opensea_is_known = std::any_of(analysis.links.opensea_links.begin(), analysis.links.opensea_links.end(),
                                      [](const LinkEntry& l) { return l.classification == LinkClass::official; });

  if (first) {
    std::optional<AccountInfo> account;
    if (!first->handle) {
      out.provenance.push_back({"f5,f8,f9", "twitter link without a handle: " + first->href});
    } else {
      try {
        account = accounts.lookup(*first->handle, snapshot.fetched_at);
        if (!account) out.provenance.push_back({"f5,f8,f9", "account @" + *first->handle + " unknown to provider"});
      } catch (const std::exception& e) {
        out.provenance.push_back({"f5,f8,f9", "account lookup failed: " + std::string(e.what())});
      }
    }
    if (account && account->exists) {
      f.f5_twitter_active = account->active;
      f.f8_twitter_followers = account->followers;
      const auto age = snapshot.fetched_at - account->created_at;
      f.f9_twitter_age_days = std::max(0.0, static_cast<double>(age.count()) / 86400.0);
    }
  }
  if (cfg.disable_f5) f.f5_twitter_active = false;
  return out;
}

std::string serialize_feature_matrix(const std::vector<FeatureRow>& rows) {
  std::vector<std::string> header{"snapshot_id"};
  for (auto n : kFeatureNames) header.emplace_back(n);
  header.emplace_back("label");
  std::string out = csv_line(header);
  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  for (const auto& r : rows) {
    const auto& f = r.features;
    out += csv_line({r.snapshot_id, flag(f.f1_url_matches_known), flag(f.f2_contract_matches_known),
                     std::to_string(f.f3_eth_address_count), flag(f.f4_has_twitter_link), flag(f.f5_twitter_active),
                     flag(f.f6_twitter_is_known), flag(f.f7_opensea_is_known), std::to_string(f.f8_twitter_followers),
                     format_double(f.f9_twitter_age_days), flag(f.f10_contract_name_resolvable),
                     f.label ? std::string(to_string(*f.label)) : std::string()});
  }
  return out;
}

std::vector<FeatureRow> parse_feature_matrix(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  std::vector<std::string> header{"snapshot_id"};
  for (auto n : kFeatureNames) header.emplace_back(n);
  header.emplace_back("label");
  table.require_header(header);
  std::vector<FeatureRow> rows;
  for (const auto& row : table.rows()) {
    const auto& c = row.fields;
    FeatureRow r;
    r.snapshot_id = c[0];
    auto& f = r.features;
    f.f1_url_matches_known = parse_flag(c[1], row.line, "f1");
    f.f2_contract_matches_known = parse_flag(c[2], row.line, "f2");
    f.f3_eth_address_count = parse_count(c[3], row.line, "f3");
    f.f4_has_twitter_link = parse_flag(c[4], row.line, "f4");
    f.f5_twitter_active = parse_flag(c[5], row.line, "f5");
    f.f6_twitter_is_known = parse_flag(c[6], row.line, "f6");
    f.f7_opensea_is_known = parse_flag(c[7], row.line, "f7");
    f.f8_twitter_followers = parse_count(c[8], row.line, "f8");
    {
      double v = 0;
      auto [p, ec] = std::from_chars(c[9].data(), c[9].data() + c[9].size(), v);
      if (ec != std::errc() || p != c[9].data() + c[9].size() || !(v >= 0.0))
        throw ParseError("bad f9 '" + c[9] + "'", row.line);
      f.f9_twitter_age_days = v;
    }
    f.f10_contract_name_resolvable = parse_flag(c[10], row.line, "f10");
    if (!c[11].empty()) {
      try {
        f.label = parse_label(c[11]);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), row.line);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<FeatureRow> load_feature_matrix(const std::filesystem::path& path) {
  return parse_feature_matrix(read_file(path));
}

}  // namespace scout
