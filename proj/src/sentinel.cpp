#include "scout/sentinel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <thread>

namespace scout {

namespace {

long long parse_minutes(const std::string& text, std::size_t line) {
  long long v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v < 0)
    throw ParseError("bad minute value '" + text + "'", line);
  return v;
}

double minutes_between(Timestamp from, Timestamp to) { return static_cast<double>((to - from).count()) / 60.0; }

template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
}

}  // namespace

std::string_view to_string(Cohort c) { return c == Cohort::nft ? "nft" : "regular"; }

Cohort parse_cohort(std::string_view text) {
  if (text == "nft") return Cohort::nft;
  if (text == "regular") return Cohort::regular;
  throw ParseError("unknown cohort '" + std::string(text) + "'");
}

std::string_view to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::blocklist: return "blocklist";
    case ProviderKind::detections: return "detections";
    case ProviderKind::liveness: return "liveness";
  }
  return "blocklist";
}

ProviderKind parse_provider_kind(std::string_view text) {
  if (text == "blocklist") return ProviderKind::blocklist;
  if (text == "detections") return ProviderKind::detections;
  if (text == "liveness") return ProviderKind::liveness;
  throw ParseError("unknown provider kind '" + std::string(text) + "'");
}

std::string_view to_string(PollOutcome o) {
  switch (o) {
    case PollOutcome::listed: return "listed";
    case PollOutcome::unlisted: return "unlisted";
    case PollOutcome::counted: return "counted";
    case PollOutcome::active: return "active";
    case PollOutcome::inactive: return "inactive";
    case PollOutcome::error: return "error";
  }
  return "error";
}

PollOutcome parse_poll_outcome(std::string_view text) {
  for (auto o : {PollOutcome::listed, PollOutcome::unlisted, PollOutcome::counted, PollOutcome::active,
                 PollOutcome::inactive, PollOutcome::error})
    if (to_string(o) == text) return o;
  throw ParseError("unknown poll outcome '" + std::string(text) + "'");
}

std::vector<MonitorTarget> parse_targets(std::string_view ndjson) {
  std::vector<MonitorTarget> out;
  std::unordered_set<std::string> seen;
  std::size_t n = 0;
  for (const auto& line : split(ndjson, '\n')) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MonitorTarget t;
      t.url = j.at("url").get<std::string>();
      t.first_seen = parse_rfc3339(j.at("first_seen").get<std::string>());
      t.cohort = parse_cohort(j.value("cohort", "nft"));
      if (!seen.insert(t.url).second) throw ParseError("duplicate target '" + t.url + "'");
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed target: ") + e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

std::vector<MonitorTarget> load_targets(const std::filesystem::path& path) { return parse_targets(read_file(path)); }

ScriptedProvider::ScriptedProvider(std::string id, ProviderKind kind, std::string column,
                                   std::map<std::string, Script> scripts)
    : id_(std::move(id)), kind_(kind), column_(std::move(column)), scripts_(std::move(scripts)) {}

Observation ScriptedProvider::poll(const MonitorTarget& target, Timestamp now) {
  Observation obs;
  const auto it = scripts_.find(target.url);
  const Script* s = it == scripts_.end() ? nullptr : &it->second;
  if (s && s->always_error) throw Error(id_ + ": scripted failure for " + target.url);
  const auto elapsed = (now - target.first_seen).count();
  const bool reached = s && s->after_minutes && elapsed >= *s->after_minutes * 60;
  switch (kind_) {
    case ProviderKind::blocklist:
      obs.listed = reached;
      break;
    case ProviderKind::detections:
      obs.detection_count = 0;
      if (s)
        for (const auto& [minute, count] : s->series)
          if (elapsed >= minute * 60) obs.detection_count = count;
      break;
    case ProviderKind::liveness:
      if (column_ == "inactive_after_minutes") {
        obs.reachable = !reached;
        if (!reached) obs.similarity = 1.0;
      } else {
        obs.reachable = true;
        obs.similarity = reached ? 0.0 : 1.0;
      }
      break;
  }
  return obs;
}

std::vector<std::unique_ptr<MonitorProvider>> parse_provider_fixture(std::string_view csv_text) {
  const auto table = CsvTable::parse(csv_text);
  const auto& h = table.header();
  if (h.size() != 3 || h[0] != "url" || h[1] != "provider")
    throw ParseError("provider fixture header must be url,provider,<column>", 1);
  const std::string column = h[2];
  ProviderKind kind;
  if (column == "listed_after_minutes")
    kind = ProviderKind::blocklist;
  else if (column == "count_series")
    kind = ProviderKind::detections;
  else if (column == "inactive_after_minutes" || column == "changed_after_minutes")
    kind = ProviderKind::liveness;
  else
    throw ParseError("unknown provider fixture column '" + column + "'", 1);

  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, ScriptedProvider::Script>> scripts;
  for (const auto& row : table.rows()) {
    const std::string& url = row.fields[0];
    const std::string& provider = row.fields[1];
    const std::string value = trim(row.fields[2]);
    if (provider.empty()) throw ParseError("empty provider id", row.line);
    if (!scripts.count(provider)) order.push_back(provider);
    ScriptedProvider::Script s;
    if (value == "error") {
      s.always_error = true;
    } else if (kind == ProviderKind::detections) {
      long long last = -1;
      for (const auto& step : split(value, ';')) {
        if (trim(step).empty()) continue;
        const auto parts = split(trim(step), ':');
        if (parts.size() != 2) throw ParseError("bad count_series step '" + step + "'", row.line);
        const long long minute = parse_minutes(parts[0], row.line);
        if (minute <= last) throw ParseError("count_series minutes must increase", row.line);
        last = minute;
        s.series.emplace_back(minute, static_cast<std::uint64_t>(parse_minutes(parts[1], row.line)));
      }
    } else if (!value.empty() && value != "never") {
      s.after_minutes = parse_minutes(value, row.line);
    }
    if (!scripts[provider].emplace(url, std::move(s)).second)
      throw ParseError("duplicate row for " + url + " / " + provider, row.line);
  }
  std::vector<std::unique_ptr<MonitorProvider>> out;
  for (const auto& id : order)
    out.push_back(std::make_unique<ScriptedProvider>(id, kind, column, std::move(scripts[id])));
  return out;
}

std::vector<std::unique_ptr<MonitorProvider>> load_provider_fixtures(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("provider fixture directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::unique_ptr<MonitorProvider>> out;
  std::unordered_set<std::string> ids;
  for (const auto& f : files) {
    try {
      for (auto& p : parse_provider_fixture(read_file(f))) {
        if (!ids.insert(p->id()).second) throw DataError("provider '" + p->id() + "' defined twice");
        out.push_back(std::move(p));
      }
    } catch (const ParseError& e) {
      throw ParseError(f.filename().string() + ": " + e.what(), e.line());
    }
  }
  return out;
}

LivenessProber::LivenessProber(std::string id, Fetcher& fetcher, FetchLimits limits)
    : id_(std::move(id)), fetcher_(fetcher), limits_(limits) {}

Observation LivenessProber::poll(const MonitorTarget& target, Timestamp now) {
  const SiteSnapshot snap = fetch_snapshot(target.url, limits_, fetcher_, now);
  Observation obs;
  obs.reachable = snap.reachable();
  if (!snap.reachable()) return obs;
  auto tokens = token_set(snap);
  std::lock_guard lock(mutex_);
  const auto [it, inserted] = baselines_.emplace(target.url, tokens);
  obs.similarity = inserted ? 1.0 : jaccard(it->second, tokens);
  return obs;
}

MonitorLog::MonitorLog(const MonitorLog& other) {
  std::lock_guard lock(other.mutex_);
  targets_ = other.targets_;
  samples_ = other.samples_;
}

MonitorLog& MonitorLog::operator=(const MonitorLog& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  targets_ = other.targets_;
  samples_ = other.samples_;
  return *this;
}

void MonitorLog::add_target(const MonitorTarget& t) {
  std::lock_guard lock(mutex_);
  for (const auto& existing : targets_)
    if (existing.url == t.url) throw DataError("duplicate target '" + t.url + "'");
  targets_.push_back(t);
}

void MonitorLog::append(PollSample s) {
  std::lock_guard lock(mutex_);
  samples_.push_back(std::move(s));
}

std::vector<MonitorTarget> MonitorLog::targets() const {
  std::lock_guard lock(mutex_);
  return targets_;
}

std::vector<PollSample> MonitorLog::samples() const {
  std::vector<PollSample> out;
  {
    std::lock_guard lock(mutex_);
    out = samples_;
  }
  std::stable_sort(out.begin(), out.end(), [](const PollSample& a, const PollSample& b) {
    return std::tie(a.polled_at, a.provider, a.url) < std::tie(b.polled_at, b.provider, b.url);
  });
  return out;
}

std::string MonitorLog::to_ndjson() const {
  using ojson = nlohmann::ordered_json;
  std::string out;
  for (const auto& t : targets()) {
    ojson j;
    j["type"] = "target";
    j["url"] = t.url;
    j["first_seen"] = format_rfc3339(t.first_seen);
    j["cohort"] = to_string(t.cohort);
    out += j.dump() + "\n";
  }
  for (const auto& s : samples()) {
    ojson j;
    j["type"] = "sample";
    j["url"] = s.url;
    j["provider"] = s.provider;
    j["kind"] = to_string(s.kind);
    j["polled_at"] = format_rfc3339(s.polled_at);
    j["outcome"] = to_string(s.outcome);
    if (s.detection_count) j["count"] = *s.detection_count;
    if (s.reachable) j["reachable"] = *s.reachable;
    if (s.similarity) j["similarity"] = *s.similarity;
    if (s.error) j["error"] = *s.error;
    out += j.dump() + "\n";
  }
  return out;
}

MonitorLog MonitorLog::parse(std::string_view ndjson) {
  MonitorLog log;
  std::size_t n = 0;
  for (const auto& line : split(ndjson, '\n')) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "target") {
        log.add_target({j.at("url").get<std::string>(), parse_rfc3339(j.at("first_seen").get<std::string>()),
                        parse_cohort(j.at("cohort").get<std::string>())});
      } else if (type == "sample") {
        PollSample s;
        s.url = j.at("url").get<std::string>();
        s.provider = j.at("provider").get<std::string>();
        s.kind = parse_provider_kind(j.at("kind").get<std::string>());
        s.polled_at = parse_rfc3339(j.at("polled_at").get<std::string>());
        s.outcome = parse_poll_outcome(j.at("outcome").get<std::string>());
        if (j.contains("count")) s.detection_count = j["count"].get<std::uint64_t>();
        if (j.contains("reachable")) s.reachable = j["reachable"].get<bool>();
        if (j.contains("similarity")) s.similarity = j["similarity"].get<double>();
        if (j.contains("error")) s.error = j["error"].get<std::string>();
        log.append(std::move(s));
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed event: ") + e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    } catch (const DataError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return log;
}

MonitorLog MonitorLog::load(const std::filesystem::path& path) { return parse(read_file(path)); }

MonitorLog run_monitor(const std::vector<MonitorTarget>& targets,
                       const std::vector<std::unique_ptr<MonitorProvider>>& providers, const MonitorConfig& cfg) {
  if (cfg.interval <= Seconds{0}) throw UsageError("monitor interval must be positive");
  if (cfg.horizon < cfg.interval) throw UsageError("monitor horizon must be at least one interval");
  MonitorLog log;
  for (const auto& t : targets) log.add_target(t);
  if (targets.empty() || providers.empty()) return log;

  Timestamp origin = targets.front().first_seen, end = origin;
  for (const auto& t : targets) {
    origin = std::min(origin, t.first_seen);
    end = std::max(end, t.first_seen + cfg.horizon);
  }
  if (!cfg.simulate) {
    const auto now = std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now());
    if (origin < now) origin += ((now - origin + cfg.interval - Seconds{1}) / cfg.interval) * cfg.interval;
  }

  struct PairState {
    bool done = false;
    int low_streak = 0;
  };
  std::vector<PairState> state(targets.size() * providers.size());

  struct Due {
    std::size_t target, provider;
  };
  std::vector<Due> due;
  std::vector<PollSample> results;
  for (Timestamp tick = origin; tick <= end; tick += cfg.interval) {
    due.clear();
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (tick < targets[t].first_seen || tick > targets[t].first_seen + cfg.horizon) continue;
      for (std::size_t p = 0; p < providers.size(); ++p)
        if (!state[t * providers.size() + p].done) due.push_back({t, p});
    }
    if (due.empty()) continue;
    if (!cfg.simulate) std::this_thread::sleep_until(tick);

    results.assign(due.size(), {});
    parallel_for(due.size(), cfg.parallel, [&](std::size_t i) {
      const auto& target = targets[due[i].target];
      auto& provider = *providers[due[i].provider];
      PollSample& s = results[i];
      s.url = target.url;
      s.provider = provider.id();
      s.kind = provider.kind();
      s.polled_at = cfg.simulate ? tick : std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now());
      try {
        const Observation obs = provider.poll(target, tick);
        switch (s.kind) {
          case ProviderKind::blocklist:
            s.outcome = obs.listed.value_or(false) ? PollOutcome::listed : PollOutcome::unlisted;
            break;
          case ProviderKind::detections:
            s.outcome = PollOutcome::counted;
            s.detection_count = obs.detection_count.value_or(0);
            break;
          case ProviderKind::liveness:
            s.outcome = PollOutcome::active;
            s.reachable = obs.reachable.value_or(true);
            s.similarity = obs.similarity;
            break;
        }
      } catch (const std::exception& e) {
        s.outcome = PollOutcome::error;
        s.error = e.what();
      }
    });

    for (std::size_t i = 0; i < due.size(); ++i) {
      PollSample& s = results[i];
      PairState& st = state[due[i].target * providers.size() + due[i].provider];
      if (s.outcome == PollOutcome::listed) st.done = true;
      if (s.kind == ProviderKind::liveness && s.outcome != PollOutcome::error) {
        if (!*s.reachable) {
          s.outcome = PollOutcome::inactive;
        } else if (s.similarity && *s.similarity < kTakedownSimilarity) {
          if (++st.low_streak >= 2) s.outcome = PollOutcome::inactive;
        } else {
          st.low_streak = 0;
        }
        if (s.outcome == PollOutcome::inactive) st.done = true;
      }
      log.append(std::move(s));
    }
  }
  return log;
}

namespace {

std::vector<MonitorTarget> cohort_targets(const MonitorLog& log, Cohort cohort) {
  auto all = log.targets();
  std::erase_if(all, [&](const MonitorTarget& t) { return t.cohort != cohort; });
  if (all.empty()) throw DataError("no targets in cohort '" + std::string(to_string(cohort)) + "'");
  return all;
}

// First listed time per URL for one provider.
std::map<std::string, Timestamp> first_listings(const MonitorLog& log, std::string_view provider) {
  std::map<std::string, Timestamp> first;
  for (const auto& s : log.samples())
    if (s.provider == provider && s.outcome == PollOutcome::listed) first.emplace(s.url, s.polled_at);
  return first;
}

}  // namespace

CoverageReport coverage_stats(const MonitorLog& log, std::string_view provider, Cohort cohort) {
  const auto targets = cohort_targets(log, cohort);
  const auto first = first_listings(log, provider);
  CoverageReport r;
  r.provider = std::string(provider);
  r.cohort = cohort;
  r.n_total = targets.size();
  for (const auto& t : targets)
    if (const auto it = first.find(t.url); it != first.end())
      r.speeds_minutes.push_back(minutes_between(t.first_seen, it->second));
  r.n_detected = r.speeds_minutes.size();
  std::sort(r.speeds_minutes.begin(), r.speeds_minutes.end());
  r.coverage_fraction = static_cast<double>(r.n_detected) / static_cast<double>(r.n_total);
  if (!r.speeds_minutes.empty()) r.median_speed_minutes = stats::median(r.speeds_minutes);
  return r;
}

std::string format_hhmm(std::optional<double> minutes) {
  if (!minutes) return "—";
  const long long m = std::llround(*minutes);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld", m / 60, m % 60);
  return buf;
}

std::vector<CoveragePoint> coverage_series(const MonitorLog& log, std::string_view provider, Cohort cohort,
                                           Seconds step, Seconds horizon) {
  if (step <= Seconds{0}) throw UsageError("series step must be positive");
  const auto report = coverage_stats(log, provider, cohort);
  std::vector<CoveragePoint> out;
  for (Seconds e{0}; e <= horizon; e += step) {
    const double minutes = static_cast<double>(e.count()) / 60.0;
    const auto n = std::upper_bound(report.speeds_minutes.begin(), report.speeds_minutes.end(), minutes) -
                   report.speeds_minutes.begin();
    out.push_back({minutes, static_cast<double>(n) / static_cast<double>(report.n_total)});
  }
  return out;
}

TakedownReport takedown_stats(const MonitorLog& log, const std::optional<std::string>& provider) {
  const auto samples = log.samples();
  TakedownReport r;
  std::vector<double> hours;
  for (const auto& t : log.targets()) {
    std::vector<const PollSample*> mine;
    for (const auto& s : samples)
      if (s.url == t.url && s.kind == ProviderKind::liveness && s.outcome != PollOutcome::error &&
          (!provider || s.provider == *provider))
        mine.push_back(&s);
    if (mine.empty()) continue;
    TakedownEntry e{t.url, std::nullopt};
    for (std::size_t i = 0; i < mine.size(); ++i) {
      const auto& s = *mine[i];
      const bool failed = s.reachable && !*s.reachable;
      auto low = [](const PollSample& p) {
        return p.reachable.value_or(true) && p.similarity && *p.similarity < kTakedownSimilarity;
      };
      if (failed || (low(s) && i + 1 < mine.size() && low(*mine[i + 1]))) {
        e.inactive_after_hours = static_cast<double>((s.polled_at - t.first_seen).count()) / 3600.0;
        break;
      }
    }
    if (e.inactive_after_hours)
      hours.push_back(*e.inactive_after_hours);
    else
      ++r.censored;
    r.targets.push_back(std::move(e));
  }
  if (!hours.empty()) r.quartiles = stats::quartiles(hours);
  return r;
}

std::map<std::uint64_t, std::size_t> detection_histogram(const MonitorLog& log,
                                                         const std::vector<std::string>& providers) {
  std::map<std::string, std::uint64_t> max_count;
  for (const auto& s : log.samples()) {
    if (s.kind != ProviderKind::detections || !s.detection_count) continue;
    if (!providers.empty() && std::find(providers.begin(), providers.end(), s.provider) == providers.end()) continue;
    auto [it, inserted] = max_count.emplace(s.url, *s.detection_count);
    if (!inserted) it->second = std::max(it->second, *s.detection_count);
  }
  std::map<std::uint64_t, std::size_t> hist;
  for (const auto& [url, m] : max_count) ++hist[m];
  return hist;
}

}  // namespace scout
