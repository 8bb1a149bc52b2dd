#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scout/common.hpp"
#include "scout/stats.hpp"

namespace scout {

// Giveaway-tweet grammar loaded from a pattern file ("<key> = <regex>" lines).
class PromoGrammar {
 public:
  struct Rule {
    std::string key;       // follow, retweet, like, tag, prize, deadline
    std::string currency;  // fixed currency for "prize:<cur>" keys
    std::string pattern;
    std::regex regex;
  };

  static PromoGrammar parse(std::string_view text);
  static PromoGrammar load(const std::filesystem::path& path);
  static const PromoGrammar& bundled();

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
};

enum class PromoAction { follow, retweet, like, tag };
std::string_view to_string(PromoAction a);

struct Prize {
  double amount = 0;
  std::string currency;  // "$", "ETH", "NFT", "WL", ...
  friend bool operator==(const Prize&, const Prize&) = default;
};

struct PromotionTweet {
  std::string id;
  std::string promoter;  // author handle, without "@"
  std::string promotee;  // first followed handle that is not the author
  std::optional<Prize> prize;
  std::optional<Seconds> deadline;
  std::set<PromoAction> actions;
  friend bool operator==(const PromotionTweet&, const PromotionTweet&) = default;
};

// nullopt unless the text has a prize, a follow directive and a retweet directive.
std::optional<PromotionTweet> parse_promotion_tweet(std::string_view text, std::string_view author = "",
                                                    std::string_view id = "",
                                                    const PromoGrammar& grammar = PromoGrammar::bundled());

struct Tweet {
  std::string id, author, text;
  std::optional<Timestamp> created_at;
};
// NDJSON {id, author, text, created_at}.
std::vector<Tweet> load_tweets(const std::filesystem::path& path);
std::vector<Tweet> parse_tweets(std::string_view ndjson);

enum class Relation { retweeter, follower_during, follower_after, liker, replier };
std::string_view to_string(Relation r);
Relation parse_relation(std::string_view text);

struct EngagementRecord {
  std::string account_id;
  double bot_score = 0;
  Relation relation = Relation::retweeter;
};

// CSV account_id,bot_score,relation; scores outside [0,1] are rejected.
std::vector<EngagementRecord> parse_engagement(std::string_view csv_text);
std::vector<EngagementRecord> load_engagement(const std::filesystem::path& path);

struct BotCount {
  std::size_t total = 0;
  std::size_t bots = 0;
  double fraction = 0;
};

struct BotFraction {
  double threshold = 0;
  BotCount overall;
  std::map<Relation, BotCount> by_relation;
};

// Bot iff score >= t. Throws DataError for empty input or t outside [0, 1].
BotFraction bot_fraction(const std::vector<EngagementRecord>& records, double t);

struct SweepPoint {
  double threshold = 0;
  std::size_t bots = 0;
  std::size_t total = 0;
};
// Thresholds must be ascending (DataError otherwise).
std::vector<SweepPoint> threshold_sweep(const std::vector<EngagementRecord>& records,
                                        const std::vector<double>& thresholds);

enum class WilcoxonMode { exact, normal };

struct WilcoxonResult {
  double u = 0;        // min(U_x, U_y)
  double u_x = 0;
  double p_value = 1;  // two-sided
  WilcoxonMode mode = WilcoxonMode::exact;
};

inline constexpr std::size_t kExactWilcoxonLimit = 20;

// Unpaired rank-sum test with mid-ranks. Exact mode enumerates every split of
// the pooled ranks (|x|+|y| <= 20); normal mode uses the tie-corrected
// variance with a 0.5 continuity correction.
WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y, WilcoxonMode mode);

struct GroupGains {
  std::string group;
  stats::Descriptive summary;
  std::vector<std::pair<double, double>> cdf;
};
// Throws DataError for an empty group.
std::vector<GroupGains> follower_gain_stats(const std::map<std::string, std::vector<std::uint64_t>>& groups);

enum class AccountStatus { active, removed, suspended };
std::string_view to_string(AccountStatus s);
AccountStatus parse_account_status(std::string_view text);

struct CollectionEvidence {
  std::string collection;
  AccountStatus status = AccountStatus::active;
  bool mint_completed = false;
  std::optional<Timestamp> mint_date;
  std::optional<Timestamp> last_tweet_at;
  bool website_alive = true;
  bool marketplace_alive = true;
  bool shares_phishing_link = false;
  bool premint_full_rights = false;
};

// CSV collection,status,mint_completed,mint_date,last_tweet_at,website_alive,
// marketplace_alive,shares_phishing_link,premint_full_rights
std::vector<CollectionEvidence> parse_evidence(std::string_view csv_text);
std::vector<CollectionEvidence> load_evidence(const std::filesystem::path& path);

enum class FraudLabel { phishing, rugpull, abandoned_premint, legitimate, unknown };
std::string_view to_string(FraudLabel l);

struct LabelOptions {
  bool strict_rugpull = true;  // both website and marketplace dead; false = either
  Seconds abandon_after{60LL * 86400};
};

// An absent last_tweet_at never satisfies the abandonment rule.
FraudLabel label_collection(const CollectionEvidence& e, Timestamp now, const LabelOptions& opts = {});

}  // namespace scout
