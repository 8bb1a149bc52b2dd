#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scout/registry.hpp"
#include "scout/snapshot.hpp"

namespace scout {

enum class AddressCasing { all_lower, all_upper, mixed };
enum class AddressRole { unknown, wallet, contract };

std::string_view to_string(AddressCasing c);
std::string_view to_string(AddressRole r);

struct ChainAddress {
  std::string hex;  // 0x + 40 hex digits, original casing
  AddressCasing casing = AddressCasing::all_lower;
  std::optional<bool> checksum_valid;  // set only for mixed casing
  AddressRole role_hint = AddressRole::unknown;

  std::string lower() const;
  friend bool operator==(const ChainAddress&, const ChainAddress&) = default;
};

// Throws DataError unless `hex` is 0x + 40 hex digits.
ChainAddress make_chain_address(std::string_view hex);

// Mixed-case checksum of a 20-byte address: hex digit i is uppercased when
// nibble i of keccak256(lowercase hex body) is >= 8.
std::string checksum_encode(std::string_view hex);

// All-lower and all-upper addresses carry no checksum and are vacuously valid.
// Throws DataError on malformed hex.
bool validate_checksum(const ChainAddress& address);

// Source file inside a snapshot: "page.html" or "scripts/<n>.js".
struct Evidence {
  std::string file;
  std::size_t offset = 0;
  std::string pattern;
  friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct AddressHit {
  ChainAddress address;
  std::size_t occurrences = 0;
  std::vector<Evidence> locations;
  friend bool operator==(const AddressHit&, const AddressHit&) = default;
};

// Every maximal `0x[0-9a-fA-F]{40}` run (not glued to a longer hex run),
// collapsed by lowercase value and sorted by it. The representative spelling
// is the lexicographically smallest one seen.
std::vector<AddressHit> extract_chain_addresses(const SiteSnapshot& snapshot);
std::vector<AddressHit> extract_chain_addresses(std::string_view text, std::string_view file = "page.html");

enum class LinkClass { empty, official, unofficial };
std::string_view to_string(LinkClass c);

struct LinkEntry {
  std::string href;
  LinkClass classification = LinkClass::unofficial;
  std::optional<std::string> handle;  // twitter handle or opensea collection slug
  std::size_t offset = 0;
  friend bool operator==(const LinkEntry&, const LinkEntry&) = default;
};

struct LinkAudit {
  std::vector<LinkEntry> twitter_links;  // document order
  std::vector<LinkEntry> opensea_links;
  bool has_wallet_connect = false;
  bool requests_full_rights = false;
  friend bool operator==(const LinkAudit&, const LinkAudit&) = default;
};

LinkAudit audit_links(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                      const std::optional<CollectionRecord>& claimed);

enum class AttackVector { none, fund_transfer, token_steal };
std::string_view to_string(AttackVector v);
AttackVector parse_attack_vector(std::string_view text);

struct AttackVectorReport {
  AttackVector vector = AttackVector::none;
  std::vector<ChainAddress> wallet_addresses;  // extracted addresses not known as contracts
  std::size_t embedded_contract_count = 0;     // distinct registry contracts
  std::vector<Evidence> evidence;
  bool dual_evidence = false;  // token_steal won over qualifying fund_transfer evidence
  friend bool operator==(const AttackVectorReport&, const AttackVectorReport&) = default;
};

struct AnalysisConfig {
  std::size_t min_embedded_contracts = 5;  // K
};

AttackVectorReport classify_attack_vector(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                                          const AnalysisConfig& cfg = {});

// Full per-snapshot analysis record, one NDJSON line per snapshot.
struct SiteAnalysis {
  std::string snapshot_id;
  std::string url;
  std::optional<std::string> claimed_slug;
  std::vector<AddressHit> addresses;
  LinkAudit links;
  AttackVectorReport attack;
  friend bool operator==(const SiteAnalysis&, const SiteAnalysis&) = default;
};

// The collection a site presents itself as: the explicit seed slug when known,
// otherwise the registry entry whose official domain matches the URL.
std::optional<CollectionRecord> resolve_claimed(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                                                const std::optional<std::string>& seed_slug);

SiteAnalysis analyze_site(const SiteSnapshot& snapshot, const CollectionRegistry& reg,
                          const std::optional<std::string>& seed_slug = std::nullopt, const AnalysisConfig& cfg = {});

std::string to_json_line(const SiteAnalysis& a);
SiteAnalysis analysis_from_json(std::string_view line);
std::vector<SiteAnalysis> load_analyses(const std::filesystem::path& path);

}  // namespace scout
