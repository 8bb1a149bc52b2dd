#include "scout/promolytics.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "bundled_data.hpp"

namespace scout {

PromoGrammar PromoGrammar::parse(std::string_view text) {
  PromoGrammar g;
  std::size_t n = 0;
  for (const auto& raw : split(text, '\n')) {
    ++n;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError("expected '<key> = <regex>'", n);
    Rule r;
    r.key = trim(line.substr(0, eq));
    r.pattern = trim(line.substr(eq + 3));
    if (r.key.rfind("prize:", 0) == 0) {
      r.currency = r.key.substr(6);
      r.key = "prize";
      if (r.currency.empty()) throw ParseError("empty fixed currency", n);
    }
    static const std::set<std::string> kKeys{"follow", "retweet", "like", "tag", "prize", "deadline"};
    if (!kKeys.count(r.key)) throw ParseError("unknown grammar key '" + r.key + "'", n);
    try {
      r.regex = std::regex(r.pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw ParseError("invalid regex for '" + r.key + "': " + e.what(), n);
    }
    const auto groups = r.regex.mark_count();
    const std::size_t needed = r.key == "follow" ? 1 : r.key == "deadline" ? 2 : r.key == "prize" ? (r.currency.empty() ? 2 : 1) : 0;
    if (groups < needed) throw ParseError("rule '" + r.key + "' needs " + std::to_string(needed) + " capture groups", n);
    g.rules_.push_back(std::move(r));
  }
  return g;
}

PromoGrammar PromoGrammar::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const PromoGrammar& PromoGrammar::bundled() {
  static const PromoGrammar g = parse(bundled::promo_patterns());
  return g;
}

std::string_view to_string(PromoAction a) {
  switch (a) {
    case PromoAction::follow: return "follow";
    case PromoAction::retweet: return "retweet";
    case PromoAction::like: return "like";
    case PromoAction::tag: return "tag";
  }
  return "follow";
}

namespace {

struct Match {
  std::size_t position;
  std::size_t rule;
  std::smatch groups;
};

// Earliest match of any rule with `key`; ties go to the earlier rule.
std::optional<Match> first_match(const std::string& text, const PromoGrammar& g, std::string_view key,
                                 std::size_t from = 0) {
  std::optional<Match> best;
  const auto& rules = g.rules();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].key != key) continue;
    std::smatch m;
    if (!std::regex_search(text.begin() + static_cast<std::ptrdiff_t>(from), text.end(), m, rules[i].regex)) continue;
    const auto pos = from + static_cast<std::size_t>(m.position(0));
    if (!best || pos < best->position) best = Match{pos, i, m};
  }
  return best;
}

std::string normalize_currency(std::string c) {
  for (auto& ch : c) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (c.rfind("NFT", 0) == 0) return "NFT";
  if (c.rfind("WHITELIST", 0) == 0) return "WL";
  return c;
}

Seconds unit_seconds(const std::string& unit_in) {
  const std::string u = to_lower(unit_in);
  if (u.front() == 'd') return Seconds{86400};
  if (u.front() == 'h') return Seconds{3600};
  return Seconds{60};
}

}  // namespace

std::optional<PromotionTweet> parse_promotion_tweet(std::string_view text_in, std::string_view author_in,
                                                    std::string_view id, const PromoGrammar& grammar) {
  const std::string text(text_in);
  std::string author = trim(author_in);
  if (!author.empty() && author.front() == '@') author.erase(author.begin());

  PromotionTweet t;
  t.id = std::string(id);
  t.promoter = author;
  for (std::size_t from = 0; from < text.size();) {
    const auto m = first_match(text, grammar, "follow", from);
    if (!m) break;
    const std::string handle = m->groups[1].str();
    if (!iequals(handle, author)) {
      t.promotee = handle;
      break;
    }
    from = m->position + static_cast<std::size_t>(m->groups.length(0));
  }
  if (t.promotee.empty()) return std::nullopt;
  t.actions.insert(PromoAction::follow);

  if (!first_match(text, grammar, "retweet")) return std::nullopt;
  t.actions.insert(PromoAction::retweet);
  if (first_match(text, grammar, "like")) t.actions.insert(PromoAction::like);
  if (first_match(text, grammar, "tag")) t.actions.insert(PromoAction::tag);

  const auto prize = first_match(text, grammar, "prize");
  if (!prize) return std::nullopt;
  std::string amount = prize->groups[1].str();
  std::erase(amount, ',');
  try {
    t.prize = Prize{std::stod(amount), grammar.rules()[prize->rule].currency.empty()
                                           ? normalize_currency(prize->groups[2].str())
                                           : grammar.rules()[prize->rule].currency};
  } catch (const std::logic_error&) {
    return std::nullopt;
  }

  if (const auto d = first_match(text, grammar, "deadline")) {
    try {
      t.deadline = std::stoll(d->groups[1].str()) * unit_seconds(d->groups[2].str());
    } catch (const std::logic_error&) {
    }
  }
  return t;
}

std::vector<Tweet> parse_tweets(std::string_view ndjson) {
  std::vector<Tweet> out;
  std::size_t n = 0;
  for (const auto& line : split(ndjson, '\n')) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Tweet t;
      t.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
      t.author = j.at("author").get<std::string>();
      t.text = j.at("text").get<std::string>();
      if (j.contains("created_at") && j["created_at"].is_string())
        t.created_at = parse_rfc3339(j["created_at"].get<std::string>());
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed tweet: ") + e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

std::vector<Tweet> load_tweets(const std::filesystem::path& path) { return parse_tweets(read_file(path)); }

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::retweeter: return "retweeter";
    case Relation::follower_during: return "follower_during";
    case Relation::follower_after: return "follower_after";
    case Relation::liker: return "liker";
    case Relation::replier: return "replier";
  }
  return "retweeter";
}

Relation parse_relation(std::string_view text) {
  for (auto r : {Relation::retweeter, Relation::follower_during, Relation::follower_after, Relation::liker,
                 Relation::replier})
    if (to_string(r) == text) return r;
  throw ParseError("unknown relation '" + std::string(text) + "'");
}

std::vector<EngagementRecord> parse_engagement(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  table.require_header({"account_id", "bot_score", "relation"});
  std::vector<EngagementRecord> out;
  for (const auto& row : table.rows()) {
    EngagementRecord r;
    r.account_id = row.fields[0];
    try {
      std::size_t used = 0;
      r.bot_score = std::stod(row.fields[1], &used);
      if (used != row.fields[1].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::logic_error&) {
      throw ParseError("bad bot score '" + row.fields[1] + "'", row.line);
    }
    if (!(r.bot_score >= 0.0 && r.bot_score <= 1.0))
      throw ParseError("bot score outside [0, 1]: " + row.fields[1], row.line);
    try {
      r.relation = parse_relation(trim(row.fields[2]));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), row.line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EngagementRecord> load_engagement(const std::filesystem::path& path) {
  return parse_engagement(read_file(path));
}

BotFraction bot_fraction(const std::vector<EngagementRecord>& records, double t) {
  if (records.empty()) throw DataError("no engagement records");
  if (!(t >= 0.0 && t <= 1.0)) throw DataError("bot threshold outside [0, 1]");
  BotFraction out;
  out.threshold = t;
  for (const auto& r : records) {
    const bool bot = r.bot_score >= t;
    for (BotCount* c : {&out.overall, &out.by_relation[r.relation]}) {
      ++c->total;
      c->bots += bot ? 1 : 0;
    }
  }
  auto finish = [](BotCount& c) { c.fraction = static_cast<double>(c.bots) / static_cast<double>(c.total); };
  finish(out.overall);
  for (auto& [rel, c] : out.by_relation) finish(c);
  return out;
}

std::vector<SweepPoint> threshold_sweep(const std::vector<EngagementRecord>& records,
                                        const std::vector<double>& thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw DataError("sweep thresholds must be ascending");
  std::vector<SweepPoint> out;
  for (double t : thresholds) {
    SweepPoint p{t, 0, records.size()};
    for (const auto& r : records) p.bots += r.bot_score >= t ? 1 : 0;
    out.push_back(p);
  }
  return out;
}

WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y, WilcoxonMode mode) {
  if (x.empty() || y.empty()) throw DataError("rank-sum test needs two non-empty samples");
  const std::size_t n = x.size(), m = y.size(), total = n + m;
  if (mode == WilcoxonMode::exact && total > kExactWilcoxonLimit)
    throw DataError("exact rank-sum test limited to " + std::to_string(kExactWilcoxonLimit) + " observations");

  // Doubled mid-ranks keep tied ranks integral.
  std::vector<std::pair<double, std::size_t>> pooled;
  for (std::size_t i = 0; i < n; ++i) pooled.emplace_back(x[i], i);
  for (std::size_t i = 0; i < m; ++i) pooled.emplace_back(y[i], n + i);
  std::sort(pooled.begin(), pooled.end());
  std::vector<long long> rank2(total);
  double tie_term = 0;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    const long long r2 = static_cast<long long>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) rank2[pooled[k].second] = r2;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  long long rx2 = 0;
  for (std::size_t i = 0; i < n; ++i) rx2 += rank2[i];
  const long long base2 = static_cast<long long>(n * (n + 1));
  const long long nm2 = static_cast<long long>(2 * n * m);
  const long long ux2 = rx2 - base2;
  const long long u2 = std::min(ux2, nm2 - ux2);

  WilcoxonResult r;
  r.mode = mode;
  r.u_x = static_cast<double>(ux2) / 2.0;
  r.u = static_cast<double>(u2) / 2.0;

  if (mode == WilcoxonMode::exact) {
    // ways[k][s]: subsets of size k with doubled rank sum s.
    long long max_sum = 0;
    for (auto v : rank2) max_sum += v;
    std::vector<std::vector<double>> ways(n + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1;
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t k = std::min(i + 1, n); k >= 1; --k)
        for (long long s = max_sum; s >= rank2[i]; --s)
          ways[k][static_cast<std::size_t>(s)] += ways[k - 1][static_cast<std::size_t>(s - rank2[i])];
    double extreme = 0, all = 0;
    for (long long s = 0; s <= max_sum; ++s) {
      const double w = ways[n][static_cast<std::size_t>(s)];
      if (w == 0) continue;
      all += w;
      const long long ua2 = s - base2;
      if (std::min(ua2, nm2 - ua2) <= u2) extreme += w;
    }
    r.p_value = std::min(1.0, extreme / all);
    return r;
  }

  const double nn = static_cast<double>(n), mm = static_cast<double>(m), N = static_cast<double>(total);
  const double mu = nn * mm / 2.0;
  const double var = nn * mm / 12.0 * ((N + 1.0) - tie_term / (N * (N - 1.0)));
  if (var <= 0) {
    r.p_value = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.u - mu) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

std::vector<GroupGains> follower_gain_stats(const std::map<std::string, std::vector<std::uint64_t>>& groups) {
  std::vector<GroupGains> out;
  for (const auto& [name, gains] : groups) {
    if (gains.empty()) throw DataError("group '" + name + "' has no follower gains");
    std::vector<double> v(gains.begin(), gains.end());
    out.push_back({name, stats::describe(v), stats::ecdf(v)});
  }
  return out;
}

std::string_view to_string(AccountStatus s) {
  switch (s) {
    case AccountStatus::active: return "active";
    case AccountStatus::removed: return "removed";
    case AccountStatus::suspended: return "suspended";
  }
  return "active";
}

AccountStatus parse_account_status(std::string_view text) {
  for (auto s : {AccountStatus::active, AccountStatus::removed, AccountStatus::suspended})
    if (to_string(s) == text) return s;
  throw ParseError("unknown account status '" + std::string(text) + "'");
}

std::vector<CollectionEvidence> parse_evidence(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  table.require_header({"collection", "status", "mint_completed", "mint_date", "last_tweet_at", "website_alive",
                        "marketplace_alive", "shares_phishing_link", "premint_full_rights"});
  std::vector<CollectionEvidence> out;
  for (const auto& row : table.rows()) {
    const auto& c = row.fields;
    try {
      CollectionEvidence e;
      e.collection = c[0];
      e.status = parse_account_status(trim(c[1]));
      e.mint_completed = parse_bool(c[2]);
      if (!trim(c[3]).empty()) e.mint_date = parse_rfc3339(c[3]);
      if (!trim(c[4]).empty()) e.last_tweet_at = parse_rfc3339(c[4]);
      e.website_alive = parse_bool(c[5]);
      e.marketplace_alive = parse_bool(c[6]);
      e.shares_phishing_link = parse_bool(c[7]);
      e.premint_full_rights = parse_bool(c[8]);
      out.push_back(std::move(e));
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    }
  }
  return out;
}

std::vector<CollectionEvidence> load_evidence(const std::filesystem::path& path) {
  return parse_evidence(read_file(path));
}

std::string_view to_string(FraudLabel l) {
  switch (l) {
    case FraudLabel::phishing: return "phishing";
    case FraudLabel::rugpull: return "rugpull";
    case FraudLabel::abandoned_premint: return "abandoned_premint";
    case FraudLabel::legitimate: return "legitimate";
    case FraudLabel::unknown: return "unknown";
  }
  return "unknown";
}

FraudLabel label_collection(const CollectionEvidence& e, Timestamp now, const LabelOptions& opts) {
  if (e.shares_phishing_link) return FraudLabel::phishing;
  const bool dead = opts.strict_rugpull ? (!e.website_alive && !e.marketplace_alive)
                                        : (!e.website_alive || !e.marketplace_alive);
  if (e.mint_completed && dead) return FraudLabel::rugpull;
  if (e.mint_date && *e.mint_date < now && !e.mint_completed && e.last_tweet_at &&
      now - *e.last_tweet_at >= opts.abandon_after)
    return FraudLabel::abandoned_premint;
  if (e.status == AccountStatus::active) return FraudLabel::legitimate;
  return FraudLabel::unknown;
}

}  // namespace scout
