#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "scout/common.hpp"
#include "scout/snapshot.hpp"
#include "scout/stats.hpp"

namespace scout {

enum class Cohort { nft, regular };
std::string_view to_string(Cohort c);
Cohort parse_cohort(std::string_view text);

struct MonitorTarget {
  std::string url;
  Timestamp first_seen{};
  Cohort cohort = Cohort::nft;
  friend bool operator==(const MonitorTarget&, const MonitorTarget&) = default;
};

// NDJSON lines {"url", "first_seen", "cohort"}.
std::vector<MonitorTarget> load_targets(const std::filesystem::path& path);
std::vector<MonitorTarget> parse_targets(std::string_view ndjson);

enum class ProviderKind { blocklist, detections, liveness };
std::string_view to_string(ProviderKind k);
ProviderKind parse_provider_kind(std::string_view text);

enum class PollOutcome { listed, unlisted, counted, active, inactive, error };
std::string_view to_string(PollOutcome o);
PollOutcome parse_poll_outcome(std::string_view text);

struct PollSample {
  std::string url;
  std::string provider;
  ProviderKind kind = ProviderKind::blocklist;
  Timestamp polled_at{};
  PollOutcome outcome = PollOutcome::unlisted;
  std::optional<std::uint64_t> detection_count;  // detections
  std::optional<bool> reachable;                 // liveness
  std::optional<double> similarity;              // liveness, vs the baseline snapshot
  std::optional<std::string> error;
  friend bool operator==(const PollSample&, const PollSample&) = default;
};

// What a provider reports for one poll. Providers throw to signal an error.
struct Observation {
  std::optional<bool> listed;
  std::optional<std::uint64_t> detection_count;
  std::optional<bool> reachable;
  std::optional<double> similarity;
};

class MonitorProvider {
 public:
  virtual ~MonitorProvider() = default;
  virtual const std::string& id() const = 0;
  virtual ProviderKind kind() const = 0;
  // Must be safe to call concurrently for distinct targets.
  virtual Observation poll(const MonitorTarget& target, Timestamp now) = 0;
};

// Scripted provider driven by a fixture CSV `url,provider,<column>` where the
// column is one of listed_after_minutes, count_series, inactive_after_minutes,
// changed_after_minutes. A cell "error" makes every poll of that URL fail.
// count_series is "minute:count;minute:count;..." (a step function). URLs
// absent from the fixture are unlisted / zero / active.
class ScriptedProvider final : public MonitorProvider {
 public:
  struct Script {
    std::optional<long long> after_minutes;  // listing / death / change time
    std::vector<std::pair<long long, std::uint64_t>> series;
    bool always_error = false;
  };
  ScriptedProvider(std::string id, ProviderKind kind, std::string column, std::map<std::string, Script> scripts);

  const std::string& id() const override { return id_; }
  ProviderKind kind() const override { return kind_; }
  Observation poll(const MonitorTarget& target, Timestamp now) override;

 private:
  std::string id_;
  ProviderKind kind_;
  std::string column_;
  std::map<std::string, Script> scripts_;
};

// One provider per distinct `provider` value, in order of first appearance.
std::vector<std::unique_ptr<MonitorProvider>> parse_provider_fixture(std::string_view csv_text);
// Every *.csv in `dir`, files in name order.
std::vector<std::unique_ptr<MonitorProvider>> load_provider_fixtures(const std::filesystem::path& dir);

// Live liveness check: fetches the site and compares its token set with the
// first reachable snapshot of the same URL.
class LivenessProber final : public MonitorProvider {
 public:
  LivenessProber(std::string id, Fetcher& fetcher, FetchLimits limits = {});
  const std::string& id() const override { return id_; }
  ProviderKind kind() const override { return ProviderKind::liveness; }
  Observation poll(const MonitorTarget& target, Timestamp now) override;

 private:
  std::string id_;
  Fetcher& fetcher_;
  FetchLimits limits_;
  std::mutex mutex_;
  std::map<std::string, std::unordered_set<std::string>> baselines_;
};

inline constexpr double kTakedownSimilarity = 0.3;

// Append-only, thread-safe sample log. Reads return samples ordered by
// (polled_at, provider, url).
class MonitorLog {
 public:
  MonitorLog() = default;
  MonitorLog(const MonitorLog& other);
  MonitorLog& operator=(const MonitorLog& other);

  void add_target(const MonitorTarget& t);
  void append(PollSample s);

  std::vector<MonitorTarget> targets() const;
  std::vector<PollSample> samples() const;

  // Target lines first, then samples in read order.
  std::string to_ndjson() const;
  static MonitorLog parse(std::string_view ndjson);
  static MonitorLog load(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::vector<MonitorTarget> targets_;
  std::vector<PollSample> samples_;
};

struct MonitorConfig {
  Seconds interval{600};
  Seconds horizon{7 * 24 * 3600};
  bool simulate = true;      // virtual clock instead of wall time
  std::size_t parallel = 1;  // concurrent polls per tick (live mode)
};

// Polls on a grid origin + k*interval, origin = earliest first_seen. A pair
// (target, provider) is polled at ticks within [first_seen, first_seen + horizon]
// until it reaches a terminal state (listed, or inactive for liveness).
MonitorLog run_monitor(const std::vector<MonitorTarget>& targets,
                       const std::vector<std::unique_ptr<MonitorProvider>>& providers, const MonitorConfig& cfg);

struct CoverageReport {
  std::string provider;
  Cohort cohort = Cohort::nft;
  std::size_t n_total = 0;
  std::size_t n_detected = 0;
  double coverage_fraction = 0.0;
  std::optional<double> median_speed_minutes;  // over detected targets only
  std::vector<double> speeds_minutes;          // per detected target, ascending
};

// Throws DataError when the cohort has no targets.
CoverageReport coverage_stats(const MonitorLog& log, std::string_view provider, Cohort cohort);

// "hh:mm" (hours may exceed 24), or "—" when absent.
std::string format_hhmm(std::optional<double> minutes);

struct CoveragePoint {
  double elapsed_minutes = 0;
  double coverage_fraction = 0;
};
// Fraction of the cohort listed within each elapsed time since first_seen.
std::vector<CoveragePoint> coverage_series(const MonitorLog& log, std::string_view provider, Cohort cohort,
                                           Seconds step, Seconds horizon);

struct TakedownEntry {
  std::string url;
  std::optional<double> inactive_after_hours;  // nullopt = still active (censored)
};
struct TakedownReport {
  std::vector<TakedownEntry> targets;        // targets with liveness samples, in target order
  std::optional<stats::Quartiles> quartiles;  // over uncensored hours; nullopt when none
  std::size_t censored = 0;
};

// Inactive at the first poll whose transport failed, or at the first of two
// consecutive polls with similarity below kTakedownSimilarity. Provider errors
// are skipped. `provider` selects one liveness provider; default is all.
TakedownReport takedown_stats(const MonitorLog& log, const std::optional<std::string>& provider = std::nullopt);

// Per target, the maximum detection count seen across `providers` (all
// detection providers when empty); histogram of those maxima.
std::map<std::uint64_t, std::size_t> detection_histogram(const MonitorLog& log,
                                                         const std::vector<std::string>& providers = {});

}  // namespace scout
