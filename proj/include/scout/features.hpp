#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scout/common.hpp"
#include "scout/registry.hpp"
#include "scout/siteanalysis.hpp"
#include "scout/snapshot.hpp"

namespace scout {

struct AccountInfo {
  std::string handle;
  bool exists = false;
  bool active = false;
  std::uint64_t followers = 0;
  Timestamp created_at{};
  Timestamp fetched_at{};
  friend bool operator==(const AccountInfo&, const AccountInfo&) = default;
};

// Social-account lookup. Implementations must tolerate concurrent calls.
// Returns nullopt when the account is unknown; throws on provider failure.
class AccountProvider {
 public:
  virtual ~AccountProvider() = default;
  virtual std::optional<AccountInfo> lookup(std::string_view handle, Timestamp as_of) const = 0;
};

// CSV fixture: handle,exists,active,followers,created_at
class FixtureAccountProvider final : public AccountProvider {
 public:
  static FixtureAccountProvider load(const std::filesystem::path& path);
  static FixtureAccountProvider parse(std::string_view csv_text);
  std::optional<AccountInfo> lookup(std::string_view handle, Timestamp as_of) const override;

 private:
  std::map<std::string, AccountInfo> accounts_;  // keyed by lowercase handle
};

// Contract address -> collection name. Lookups are deterministic.
class ContractNameProvider {
 public:
  virtual ~ContractNameProvider() = default;
  virtual std::optional<std::string> name_of(std::string_view address) const = 0;
};

// CSV fixture: contract_address,name
class FixtureNameProvider final : public ContractNameProvider {
 public:
  FixtureNameProvider() = default;
  static FixtureNameProvider load(const std::filesystem::path& path);
  static FixtureNameProvider parse(std::string_view csv_text);
  std::optional<std::string> name_of(std::string_view address) const override;

 private:
  std::map<std::string, std::string> names_;  // keyed by lowercase address
};

enum class Label { phishing, benign };
std::string_view to_string(Label l);
Label parse_label(std::string_view text);

inline constexpr std::size_t kFeatureCount = 10;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9", "f10"};

struct FeatureVector {
  bool f1_url_matches_known = false;
  bool f2_contract_matches_known = false;
  std::uint64_t f3_eth_address_count = 0;
  bool f4_has_twitter_link = false;
  bool f5_twitter_active = false;
  bool f6_twitter_is_known = false;
  bool f7_opensea_is_known = false;
  std::uint64_t f8_twitter_followers = 0;
  double f9_twitter_age_days = 0.0;
  bool f10_contract_name_resolvable = false;
  std::optional<Label> label;

  std::array<double, kFeatureCount> values() const;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureConfig {
  bool disable_f5 = false;
};

// Why a feature fell back to a default, e.g. {"f5", "account lookup failed: ..."}.
struct ProvenanceNote {
  std::string feature;
  std::string note;
};

struct FeatureResult {
  FeatureVector features;
  std::vector<ProvenanceNote> provenance;
};

// Account data is read as of snapshot.fetched_at. A provider failure or a
// missing account yields exists=false and a provenance note for f5, f8, f9.
FeatureResult extract_features(const SiteSnapshot& snapshot, const SiteAnalysis& analysis, const CollectionRegistry& reg,
                               const AccountProvider& accounts, const ContractNameProvider& names,
                               const FeatureConfig& cfg = {});

struct FeatureRow {
  std::string snapshot_id;
  FeatureVector features;
  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

// CSV with header snapshot_id,f1,...,f10,label; booleans as 0/1, empty label when absent.
std::string serialize_feature_matrix(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_feature_matrix(std::string_view csv_text);
std::vector<FeatureRow> load_feature_matrix(const std::filesystem::path& path);

}  // namespace scout
