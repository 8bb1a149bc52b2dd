#include "scout/registry.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "scout/common.hpp"

namespace scout {

bool is_chain_address(std::string_view text) {
  return text.size() == 42 && text[0] == '0' && text[1] == 'x' &&
         std::all_of(text.begin() + 2, text.end(), is_hex_digit);
}

std::string normalize_address(std::string_view text) {
  if (!is_chain_address(text)) throw DataError("malformed chain address '" + std::string(text) + "'");
  return to_lower(text);
}

namespace {

std::string handle_key(std::string_view handle) {
  std::string h = to_lower(trim(handle));
  if (!h.empty() && h.front() == '@') h.erase(h.begin());
  return h;
}

}  // namespace

CollectionRegistry::CollectionRegistry(std::vector<CollectionRecord> records) : records_(std::move(records)) {
  std::unordered_set<std::uint32_t> ranks;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.slug.empty()) throw DataError("empty slug");
    if (r.official_domain.empty()) throw DataError("empty official_domain for '" + r.slug + "'");
    if (r.sales_rank < 1) throw DataError("sales_rank must be >= 1 for '" + r.slug + "'");
    if (!by_slug_.emplace(r.slug, i).second) throw DataError("duplicate slug '" + r.slug + "'");
    if (!ranks.insert(r.sales_rank).second)
      throw DataError("duplicate sales_rank " + std::to_string(r.sales_rank));
    by_domain_.emplace(to_lower(r.official_domain), i);
    by_contract_.emplace(normalize_address(r.contract_address), i);
    if (r.twitter_handle) by_twitter_.emplace(handle_key(*r.twitter_handle), i);
    if (r.opensea_slug) by_opensea_.emplace(to_lower(*r.opensea_slug), i);
  }
}

const CollectionRecord* CollectionRegistry::lookup(const std::unordered_map<std::string, std::size_t>& index,
                                                   const std::string& key) const {
  const auto it = index.find(key);
  return it == index.end() ? nullptr : &records_[it->second];
}

const CollectionRecord* CollectionRegistry::find_slug(std::string_view slug) const {
  return lookup(by_slug_, std::string(slug));
}
const CollectionRecord* CollectionRegistry::find_domain(std::string_view domain) const {
  return lookup(by_domain_, to_lower(domain));
}
const CollectionRecord* CollectionRegistry::find_contract(std::string_view address) const {
  return lookup(by_contract_, to_lower(address));
}
const CollectionRecord* CollectionRegistry::find_twitter(std::string_view handle) const {
  return lookup(by_twitter_, handle_key(handle));
}
const CollectionRecord* CollectionRegistry::find_opensea(std::string_view slug) const {
  return lookup(by_opensea_, to_lower(slug));
}

std::vector<CollectionRecord> CollectionRegistry::top(std::size_t n) const {
  std::vector<CollectionRecord> out = records_;
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.sales_rank < b.sales_rank; });
  if (out.size() > n) out.resize(n);
  return out;
}

CollectionRegistry parse_registry(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  table.require_header({std::begin(kRegistryHeader), std::end(kRegistryHeader)});
  std::vector<CollectionRecord> records;
  std::unordered_set<std::string> slugs;
  std::unordered_set<std::uint32_t> ranks;
  for (const auto& row : table.rows()) {
    const auto& f = row.fields;
    CollectionRecord r;
    r.slug = to_lower(trim(f[0]));
    r.name = trim(f[1]);
    r.official_domain = to_lower(trim(f[2]));
    r.contract_address = trim(f[3]);
    if (auto h = trim(f[4]); !h.empty()) r.twitter_handle = h.front() == '@' ? h.substr(1) : h;
    if (auto s = trim(f[5]); !s.empty()) r.opensea_slug = s;
    const std::string rank = trim(f[6]);
    if (r.slug.empty()) throw ParseError("empty slug", row.line);
    if (r.official_domain.empty() || !is_valid_dns_name(r.official_domain))
      throw ParseError("invalid official_domain '" + r.official_domain + "'", row.line);
    if (PublicSuffixList::bundled().registrable_domain(r.official_domain) != r.official_domain)
      throw ParseError("official_domain '" + r.official_domain + "' is not a registrable domain", row.line);
    if (!is_chain_address(r.contract_address))
      throw ParseError("malformed contract_address '" + r.contract_address + "'", row.line);
    auto [p, ec] = std::from_chars(rank.data(), rank.data() + rank.size(), r.sales_rank);
    if (ec != std::errc() || p != rank.data() + rank.size() || r.sales_rank < 1)
      throw ParseError("invalid sales_rank '" + rank + "'", row.line);
    if (!slugs.insert(r.slug).second) throw DataError("line " + std::to_string(row.line) + ": duplicate slug '" + r.slug + "'");
    if (!ranks.insert(r.sales_rank).second)
      throw DataError("line " + std::to_string(row.line) + ": duplicate sales_rank " + rank);
    records.push_back(std::move(r));
  }
  return CollectionRegistry(std::move(records));
}

CollectionRegistry load_registry(const std::filesystem::path& path) { return parse_registry(read_file(path)); }

std::string serialize_registry(const CollectionRegistry& reg) {
  std::string out = csv_line({std::begin(kRegistryHeader), std::end(kRegistryHeader)});
  for (const auto& r : reg.records())
    out += csv_line({r.slug, r.name, r.official_domain, r.contract_address, r.twitter_handle.value_or(""),
                     r.opensea_slug.value_or(""), std::to_string(r.sales_rank)});
  return out;
}

std::optional<CollectionRecord> match_official(std::string_view url, const CollectionRegistry& reg,
                                               const PublicSuffixList& psl) {
  const Url parsed = parse_url(url);
  const auto domain = psl.registrable_domain(parsed.host);
  if (!domain) return std::nullopt;
  if (const auto* r = reg.find_domain(*domain)) return *r;
  return std::nullopt;
}

std::optional<CollectionRecord> match_contract(std::string_view address, const CollectionRegistry& reg) {
  if (const auto* r = reg.find_contract(normalize_address(address))) return *r;
  return std::nullopt;
}

}  // namespace scout
