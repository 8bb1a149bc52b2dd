#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scout/url.hpp"

namespace scout {

// One known NFT collection.
struct CollectionRecord {
  std::string slug;
  std::string name;
  std::string official_domain;   // lowercase registrable domain, no scheme
  std::string contract_address;  // 0x + 40 hex, as written in the source file
  std::optional<std::string> twitter_handle;  // without "@"
  std::optional<std::string> opensea_slug;
  std::uint32_t sales_rank = 0;

  friend bool operator==(const CollectionRecord&, const CollectionRecord&) = default;
};

// `0x` followed by exactly 40 hex digits.
bool is_chain_address(std::string_view text);
// Lowercased address; throws DataError when malformed.
std::string normalize_address(std::string_view text);

// Immutable, indexed collection list. Safe to share across threads.
class CollectionRegistry {
 public:
  CollectionRegistry() = default;
  // Validates record invariants and uniqueness; throws DataError.
  explicit CollectionRegistry(std::vector<CollectionRecord> records);

  const std::vector<CollectionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const CollectionRecord* find_slug(std::string_view slug) const;
  const CollectionRecord* find_domain(std::string_view domain) const;
  const CollectionRecord* find_contract(std::string_view address) const;
  const CollectionRecord* find_twitter(std::string_view handle) const;
  const CollectionRecord* find_opensea(std::string_view slug) const;

  // Records ordered by ascending sales_rank, truncated to `n`.
  std::vector<CollectionRecord> top(std::size_t n) const;

  friend bool operator==(const CollectionRegistry& a, const CollectionRegistry& b) {
    return a.records_ == b.records_;
  }

 private:
  const CollectionRecord* lookup(const std::unordered_map<std::string, std::size_t>& index,
                                 const std::string& key) const;

  std::vector<CollectionRecord> records_;
  std::unordered_map<std::string, std::size_t> by_slug_, by_domain_, by_contract_, by_twitter_, by_opensea_;
};

inline constexpr const char* kRegistryHeader[] = {"slug",          "name",          "official_domain",
                                                  "contract_address", "twitter_handle", "opensea_slug",
                                                  "sales_rank"};

// Loads the registry CSV. Malformed rows raise ParseError with the line number;
// duplicate slugs or ranks raise DataError.
CollectionRegistry load_registry(const std::filesystem::path& path);
CollectionRegistry parse_registry(std::string_view csv_text);
std::string serialize_registry(const CollectionRegistry& reg);

// Record whose official_domain equals the registrable domain of `url`
// (case-insensitive, exact). Throws ParseError for unparseable URLs.
std::optional<CollectionRecord> match_official(std::string_view url, const CollectionRegistry& reg,
                                               const PublicSuffixList& psl = PublicSuffixList::bundled());

// Case-insensitive contract lookup. Throws DataError for malformed addresses.
std::optional<CollectionRecord> match_contract(std::string_view address, const CollectionRegistry& reg);

}  // namespace scout
