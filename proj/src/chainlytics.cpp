#include "scout/chainlytics.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "scout/registry.hpp"

namespace scout {

Wei parse_wei(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw DataError("invalid wei value '" + t + "'");
  Wei v = 0;
  try {
    for (char c : t) v = v * 10 + (c - '0');
  } catch (const std::overflow_error&) {
    throw DataError("wei value overflows 256 bits: '" + t + "'");
  }
  return v;
}

std::string wei_to_string(const Wei& v) { return v.str(); }

std::vector<ChainTransaction> parse_transactions(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  table.require_header({std::begin(kTransactionHeader), std::end(kTransactionHeader)});
  std::vector<ChainTransaction> out;
  std::unordered_set<std::string> hashes;
  for (const auto& row : table.rows()) {
    const auto& c = row.fields;
    ChainTransaction tx;
    try {
      tx.hash = to_lower(trim(c[0]));
      if (tx.hash.size() != 66 || tx.hash.rfind("0x", 0) != 0 ||
          !std::all_of(tx.hash.begin() + 2, tx.hash.end(), is_hex_digit))
        throw ParseError("malformed transaction hash '" + c[0] + "'");
      tx.from = normalize_address(trim(c[1]));
      if (!trim(c[2]).empty()) tx.to = normalize_address(trim(c[2]));
      tx.value_wei = parse_wei(c[3]);
      std::size_t used = 0;
      tx.timestamp = std::stoll(c[4], &used);
      if (used != c[4].size() || tx.timestamp < 0) throw ParseError("bad timestamp '" + c[4] + "'");
      if (!trim(c[5]).empty()) tx.method = trim(c[5]);
      tx.is_error = parse_bool(c[6]);
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    } catch (const std::logic_error&) {
      throw ParseError("bad timestamp '" + c[4] + "'", row.line);
    }
    if (!hashes.insert(tx.hash).second) throw DataError("duplicate transaction hash " + tx.hash);
    out.push_back(std::move(tx));
  }
  return out;
}

std::vector<ChainTransaction> load_transactions(const std::filesystem::path& path) {
  return parse_transactions(read_file(path));
}

std::string serialize_transactions(const std::vector<ChainTransaction>& txs) {
  std::string out = csv_line({std::begin(kTransactionHeader), std::end(kTransactionHeader)});
  for (const auto& tx : txs)
    out += csv_line({tx.hash, tx.from, tx.to, wei_to_string(tx.value_wei), std::to_string(tx.timestamp),
                     tx.method.value_or(""), tx.is_error ? "1" : "0"});
  return out;
}

PriceTable PriceTable::parse(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  table.require_header({"date", "usd"});
  PriceTable p;
  for (const auto& row : table.rows()) {
    try {
      const std::int64_t day = parse_date(row.fields[0]);
      std::size_t used = 0;
      const double usd = std::stod(row.fields[1], &used);
      if (used != row.fields[1].size() || !(usd >= 0)) throw ParseError("bad price '" + row.fields[1] + "'");
      if (p.covers(day)) throw ParseError("duplicate price date " + row.fields[0]);
      p.set(day, usd);
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    } catch (const std::logic_error&) {
      throw ParseError("bad price '" + row.fields[1] + "'", row.line);
    }
  }
  return p;
}

PriceTable PriceTable::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void PriceTable::set(std::int64_t day, double usd) { prices_[day] = usd; }

double PriceTable::price(std::int64_t day) const {
  const auto it = prices_.find(day);
  if (it == prices_.end()) throw DataError("no USD price for " + format_date(day));
  return it->second;
}

namespace {

bool is_inbound(const ChainTransaction& tx, std::string_view wallet, const TimeWindow& window) {
  return !tx.is_error && tx.to == wallet && window.contains(tx.timestamp);
}

double to_usd(const Wei& wei, double price) {
  const Wei whole = wei / kWeiPerEther;
  const Wei frac = wei % kWeiPerEther;
  return (whole.convert_to<double>() + frac.convert_to<double>() / 1e18) * price;
}

}  // namespace

WalletSummary wallet_summary(const std::vector<ChainTransaction>& txs, std::string_view wallet_in,
                             const PriceTable& prices, const TimeWindow& window) {
  WalletSummary s;
  s.wallet = normalize_address(wallet_in);
  s.window = window;
  std::map<std::int64_t, Wei> per_day;
  for (const auto& tx : txs) {
    if (!is_inbound(tx, s.wallet, window)) continue;
    ++s.inbound_tx_count;
    if (tx.value_wei == 0) {
      ++s.zero_value_tx_count;
      if (tx.method && contains_icase(*tx.method, "mint")) ++s.mint_intent_count;
      continue;
    }
    per_day[day_of(from_epoch(tx.timestamp))] += tx.value_wei;
    s.inbound_total_wei += tx.value_wei;
  }
  for (const auto& [day, wei] : per_day) s.inbound_total_usd += to_usd(wei, prices.price(day));
  return s;
}

Wei inbound_total_wei(const std::vector<ChainTransaction>& txs, const std::set<std::string>& wallets,
                      const TimeWindow& window) {
  Wei total = 0;
  for (const auto& tx : txs)
    if (!tx.is_error && wallets.count(tx.to) && window.contains(tx.timestamp)) total += tx.value_wei;
  return total;
}

std::vector<CategoryStats> category_stats(const std::map<std::string, std::vector<WalletSummary>>& by_category,
                                          const CategoryOptions& opts) {
  std::vector<CategoryStats> out;
  for (const auto& [category, summaries] : by_category) {
    if (summaries.empty()) throw DataError("category '" + category + "' has no wallets");
    std::vector<double> funds;
    for (const auto& s : summaries) funds.push_back(s.inbound_total_usd);
    std::vector<std::size_t> kept(summaries.size());
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = i;
    CategoryStats cs;
    cs.category = category;
    if (opts.iqr_categories.count(category)) {
      const auto split = stats::iqr_filter(funds, opts.iqr_k);
      kept = split.kept;
      for (auto i : split.excluded) cs.excluded_wallets.push_back(summaries[i].wallet);
      if (!split.excluded.empty())
        cs.footnote = std::to_string(split.excluded.size()) + " wallet(s) excluded with funds outside [" +
                      format_double(split.lower_fence) + ", " + format_double(split.upper_fence) + "] USD (" +
                      format_double(opts.iqr_k) + " x IQR)";
    }
    std::vector<double> kept_funds, kept_counts;
    for (auto i : kept) {
      kept_funds.push_back(funds[i]);
      kept_counts.push_back(static_cast<double>(summaries[i].inbound_tx_count));
    }
    cs.wallets = kept.size();
    cs.funds_usd = stats::describe(kept_funds);
    cs.tx_counts = stats::describe(kept_counts);
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<std::string> load_wallet_list(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::size_t n = 0;
  for (const auto& raw : split(read_file(path), '\n')) {
    ++n;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    try {
      out.push_back(normalize_address(line));
    } catch (const DataError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

std::map<std::string, std::string> load_categories(const std::filesystem::path& path) {
  const auto table = CsvTable::load(path);
  table.require_header({"wallet", "category"});
  std::map<std::string, std::string> out;
  for (const auto& row : table.rows()) {
    try {
      if (!out.emplace(normalize_address(row.fields[0]), trim(row.fields[1])).second)
        throw ParseError("wallet listed twice: " + row.fields[0]);
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    }
  }
  return out;
}

std::string chain_report_json(const std::vector<WalletSummary>& wallets, const std::vector<CategoryStats>& categories) {
  using ojson = nlohmann::ordered_json;
  auto describe = [](const stats::Descriptive& d) {
    return ojson{{"count", d.count}, {"total", d.total}, {"min", d.min},
                 {"max", d.max},     {"mean", d.mean},   {"median", d.median}};
  };
  ojson j;
  j["wallets"] = ojson::array();
  for (const auto& w : wallets) {
    ojson e;
    e["wallet"] = w.wallet;
    e["inbound_tx_count"] = w.inbound_tx_count;
    e["inbound_total_wei"] = wei_to_string(w.inbound_total_wei);
    e["inbound_total_usd"] = w.inbound_total_usd;
    e["zero_value_tx_count"] = w.zero_value_tx_count;
    e["mint_intent_count"] = w.mint_intent_count;
    e["window"] = {{"from", w.window.from ? ojson(format_rfc3339(from_epoch(*w.window.from))) : ojson(nullptr)},
                   {"to", w.window.to ? ojson(format_rfc3339(from_epoch(*w.window.to))) : ojson(nullptr)}};
    j["wallets"].push_back(std::move(e));
  }
  j["categories"] = ojson::array();
  for (const auto& c : categories) {
    ojson e;
    e["category"] = c.category;
    e["wallets"] = c.wallets;
    e["funds_usd"] = describe(c.funds_usd);
    e["tx_counts"] = describe(c.tx_counts);
    e["excluded_wallets"] = c.excluded_wallets;
    e["footnote"] = c.footnote ? ojson(*c.footnote) : ojson(nullptr);
    j["categories"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace scout
