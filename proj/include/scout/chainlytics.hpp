#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scout/common.hpp"
#include "scout/stats.hpp"

namespace scout {

// Unsigned 256-bit integer that throws std::overflow_error instead of wrapping.
using Wei = boost::multiprecision::checked_uint256_t;

inline const Wei kWeiPerEther{"1000000000000000000"};

// Throws DataError on non-decimal text or values above 2^256 - 1.
Wei parse_wei(std::string_view text);
std::string wei_to_string(const Wei& v);

struct ChainTransaction {
  std::string hash;  // 0x + 64 hex, lowercase
  std::string from;  // lowercase address
  std::string to;    // lowercase address; empty for contract creation
  Wei value_wei = 0;
  std::int64_t timestamp = 0;  // epoch seconds
  std::optional<std::string> method;
  bool is_error = false;
  friend bool operator==(const ChainTransaction&, const ChainTransaction&) = default;
};

inline constexpr const char* kTransactionHeader[] = {"hash",      "from",   "to",      "value_wei",
                                                     "timestamp", "method", "is_error"};

// Rejects malformed rows (ParseError with line) and duplicate hashes (DataError naming the hash).
std::vector<ChainTransaction> parse_transactions(std::string_view csv_text);
std::vector<ChainTransaction> load_transactions(const std::filesystem::path& path);
std::string serialize_transactions(const std::vector<ChainTransaction>& txs);

// Daily USD price of the native currency. CSV `date,usd`.
class PriceTable {
 public:
  static PriceTable parse(std::string_view csv_text);
  static PriceTable load(const std::filesystem::path& path);
  void set(std::int64_t day, double usd);
  // Throws DataError naming the date when the day is missing.
  double price(std::int64_t day) const;
  bool covers(std::int64_t day) const { return prices_.count(day) != 0; }

 private:
  std::map<std::int64_t, double> prices_;
};

// Inclusive [from, to] in epoch seconds; open ends when absent.
struct TimeWindow {
  std::optional<std::int64_t> from, to;
  bool contains(std::int64_t t) const { return (!from || t >= *from) && (!to || t <= *to); }
};

struct WalletSummary {
  std::string wallet;
  std::size_t inbound_tx_count = 0;
  Wei inbound_total_wei = 0;
  double inbound_total_usd = 0.0;
  std::size_t zero_value_tx_count = 0;
  std::size_t mint_intent_count = 0;
  TimeWindow window;
};

// Inbound = to == wallet, not errored, timestamp inside the window. Wei are
// summed exactly per day and converted once per day.
WalletSummary wallet_summary(const std::vector<ChainTransaction>& txs, std::string_view wallet,
                             const PriceTable& prices, const TimeWindow& window = {});

// Exact inbound wei over a set of wallets (for reconciliation).
Wei inbound_total_wei(const std::vector<ChainTransaction>& txs, const std::set<std::string>& wallets,
                      const TimeWindow& window = {});

struct CategoryOptions {
  std::set<std::string> iqr_categories;  // categories with Tukey outlier exclusion on funds
  double iqr_k = 1.5;
};

struct CategoryStats {
  std::string category;
  std::size_t wallets = 0;  // after exclusion
  stats::Descriptive funds_usd;
  stats::Descriptive tx_counts;
  std::vector<std::string> excluded_wallets;
  std::optional<std::string> footnote;
};

// Throws DataError for an empty category.
std::vector<CategoryStats> category_stats(const std::map<std::string, std::vector<WalletSummary>>& by_category,
                                          const CategoryOptions& opts = {});

// Wallet list: one address per line, '#' comments allowed.
std::vector<std::string> load_wallet_list(const std::filesystem::path& path);
// CSV `wallet,category`.
std::map<std::string, std::string> load_categories(const std::filesystem::path& path);

std::string chain_report_json(const std::vector<WalletSummary>& wallets, const std::vector<CategoryStats>& categories);

}  // namespace scout
