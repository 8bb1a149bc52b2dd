// scout command-line interface.
#include <CLI11.hpp>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>

#include "scout/chainlytics.hpp"
#include "scout/classifier.hpp"
#include "scout/config.hpp"
#include "scout/ctingest.hpp"
#include "scout/features.hpp"
#include "scout/pipeline.hpp"
#include "scout/promolytics.hpp"
#include "scout/registry.hpp"
#include "scout/sentinel.hpp"
#include "scout/siteanalysis.hpp"
#include "scout/snapshot.hpp"
#include "scout/squatgen.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace scout;

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitStage = 3;

void emit(const std::string& path, std::string_view text) {
  if (path.empty() || path == "-")
    std::cout << text << std::flush;
  else
    write_file(path, text);
}

Timestamp now_seconds() { return std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now()); }

Timestamp time_or_now(const std::string& text) { return text.empty() ? now_seconds() : parse_rfc3339(text); }

std::vector<std::string> list_arg(const std::string& csv) {
  std::vector<std::string> out;
  for (const auto& s : split(csv, ','))
    if (!trim(s).empty()) out.push_back(trim(s));
  return out;
}

std::string metrics_json(const Metrics& m) {
  ojson j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["roc_auc"] = std::isnan(m.roc_auc) ? ojson(nullptr) : ojson(m.roc_auc);
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j.dump();
}

std::vector<double> load_numbers(const std::string& path) {
  std::vector<double> out;
  std::size_t n = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      throw ParseError("not a number: '" + t + "'", n);
    }
  }
  return out;
}

// Forest parameters from an optional config-format file ([classifier] keys)
// overridden by explicit flags.
struct ForestFlags {
  std::string params_file;
  std::size_t n_trees = 0, max_depth = 0, min_leaf = 0, mtry = 0, threads = 1;
  bool max_depth_set = false;
  std::uint64_t seed = 7;

  void attach(CLI::App* cmd) {
    cmd->add_option("--params", params_file, "config file with a [classifier] section");
    cmd->add_option("--n-trees", n_trees);
    cmd->add_option("--max-depth", max_depth)->each([this](const std::string&) { max_depth_set = true; });
    cmd->add_option("--min-leaf", min_leaf);
    cmd->add_option("--mtry", mtry);
    cmd->add_option("--seed", seed);
    cmd->add_option("--threads", threads);
  }

  ForestParams resolve() const {
    ForestParams p;
    if (!params_file.empty()) {
      const auto cfg = Config::load(params_file);
      auto num = [&](const char* key, std::size_t fallback) -> std::size_t {
        const auto v = cfg.get("classifier", key);
        return v ? std::stoull(*v) : fallback;
      };
      p.n_trees = num("n_trees", p.n_trees);
      p.max_depth = num("max_depth", p.max_depth);
      p.min_leaf = num("min_leaf", p.min_leaf);
      p.mtry = num("mtry", p.mtry);
    }
    if (n_trees) p.n_trees = n_trees;
    if (max_depth_set) p.max_depth = max_depth;
    if (min_leaf) p.min_leaf = min_leaf;
    if (mtry) p.mtry = mtry;
    p.seed = seed;
    p.threads = threads;
    return p;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scout: NFT phishing discovery, analysis and measurement toolkit"};
  app.require_subcommand(1);
  std::size_t parallel = 4;
  app.add_option("--parallel", parallel, "global bound on intra-stage parallelism")->check(CLI::PositiveNumber);

  std::function<int()> run;

  // squat
  {
    auto* cmd = app.add_subcommand("squat", "generate typosquatting candidates for registry seeds");
    auto o = std::make_shared<std::tuple<std::string, std::string, std::string, std::size_t, std::string, std::string>>(
        "", "all", "nft,claim,mint", 0, "", "");
    auto& [seeds, rules, terms, top, first_seen, out] = *o;
    cmd->add_option("--seeds", seeds, "registry CSV")->required();
    cmd->add_option("--rules", rules, "comma-separated rule names or 'all'");
    cmd->add_option("--terms", terms, "affix terms for term_affix");
    cmd->add_option("--top", top, "only the top N collections by sales rank (0 = all)");
    cmd->add_option("--first-seen", first_seen, "RFC 3339 timestamp recorded on candidates (default now)");
    cmd->add_option("--out", out, "output NDJSON (default stdout)");
    cmd->callback([&, o] {
      run = [&, o] {
        auto& [seeds, rules, terms, top, first_seen, out] = *o;
        const auto reg = load_registry(seeds);
        const auto cands = squat_registry(reg, parse_rule_list(rules), list_arg(to_lower(terms)), top,
                                          time_or_now(first_seen));
        std::string text;
        for (const auto& c : cands) text += to_json_line(c) + "\n";
        emit(out, text);
        std::cerr << cands.size() << " candidates\n";
        return kExitOk;
      };
    });
  }

  // ct-filter
  {
    auto* cmd = app.add_subcommand("ct-filter", "filter a certificate-transparency stream");
    auto o = std::make_shared<std::tuple<std::string, std::string, std::string, std::string, std::string>>(
        "-", "", "nft,claim,mint", "", "");
    auto& [in, candidates, terms, since, out] = *o;
    cmd->add_option("--in", in, "NDJSON stream file, or - for stdin");
    cmd->add_option("--candidates", candidates, "squat candidates NDJSON to watch");
    cmd->add_option("--terms", terms, "comma-separated watch terms");
    cmd->add_option("--since", since, "ignore certificates with not_before earlier than this (RFC 3339)");
    cmd->add_option("--out", out, "output NDJSON (default stdout)");
    cmd->callback([&, o] {
      run = [&, o] {
        auto& [in, candidates, terms, since, out] = *o;
        std::vector<CandidateDomain> watched;
        if (!candidates.empty()) watched = load_candidates(candidates);
        const Timestamp since_ts = since.empty() ? Timestamp{} : parse_rfc3339(since);
        CtFilterResult r;
        if (in == "-") {
          CtStreamFilter filter(CtWatch::from(watched, list_arg(to_lower(terms))), since_ts);
          for (std::string line; std::getline(std::cin, line);)
            if (!trim(line).empty()) filter.consume_line(line, r.hits, now_seconds());
          r.stats = filter.stats();
        } else {
          r = ct_filter_file(in, watched, list_arg(to_lower(terms)), since_ts);
        }
        std::string text;
        for (const auto& c : r.hits) text += to_json_line(c) + "\n";
        emit(out, text);
        std::cerr << r.stats.lines << " lines, " << r.stats.malformed << " malformed, " << r.stats.emitted
                  << " hits\n";
        return kExitOk;
      };
    });
  }

  // fetch
  {
    auto* cmd = app.add_subcommand("fetch", "snapshot candidate sites into a corpus");
    struct Opts {
      std::string in, corpus, fixture_root, fetched_at;
      std::size_t parallel = 0, max_scripts = 10, max_redirects = 5, max_bytes = 5u << 20;
      std::string timeout = "20s";
      bool insecure = false;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--in", o->in, "candidates NDJSON")->required();
    cmd->add_option("--corpus", o->corpus, "corpus directory")->required();
    cmd->add_option("--parallel", o->parallel, "concurrent fetches (default: global --parallel)");
    cmd->add_option("--fixture-root", o->fixture_root, "serve sites from <root>/<host>/ instead of the network");
    cmd->add_option("--fetched-at", o->fetched_at, "RFC 3339 capture time (default now)");
    cmd->add_option("--max-scripts", o->max_scripts);
    cmd->add_option("--max-redirects", o->max_redirects);
    cmd->add_option("--max-bytes", o->max_bytes);
    cmd->add_option("--timeout", o->timeout);
    cmd->add_flag("--insecure", o->insecure, "skip TLS certificate verification");
    cmd->callback([&, o] {
      run = [&, o] {
        std::vector<std::string> urls;
        for (const auto& c : load_candidates(o->in)) urls.push_back(candidate_url(c));
        FetchLimits limits;
        limits.max_scripts = o->max_scripts;
        limits.max_redirects = o->max_redirects;
        limits.max_bytes = o->max_bytes;
        limits.timeout = parse_duration(o->timeout);
        std::unique_ptr<Fetcher> fetcher;
        if (!o->fixture_root.empty())
          fetcher = std::make_unique<FixtureFetcher>(o->fixture_root);
        else
          fetcher = std::make_unique<HttpFetcher>(!o->insecure);
        const auto snaps =
            fetch_all(urls, limits, *fetcher, time_or_now(o->fetched_at), o->parallel ? o->parallel : parallel);
        fs::create_directories(o->corpus);
        for (const auto& s : snaps)
          std::cout << store_snapshot(o->corpus, s) << "\t" << to_string(s.transport) << "\t" << s.url << "\n";
        return kExitOk;
      };
    });
  }

  // analyze
  {
    auto* cmd = app.add_subcommand("analyze", "extract addresses, audit links and classify attack vectors");
    struct Opts {
      std::string corpus, registry, candidates, out;
      std::size_t min_contracts = 5;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--corpus", o->corpus)->required();
    cmd->add_option("--registry", o->registry)->required();
    cmd->add_option("--candidates", o->candidates, "candidates NDJSON supplying the imitated collection per site");
    cmd->add_option("--min-contracts", o->min_contracts, "registry contracts needed for token_steal");
    cmd->add_option("--out", o->out, "output NDJSON (default stdout)");
    cmd->callback([&, o] {
      run = [&, o] {
        const auto reg = load_registry(o->registry);
        std::map<std::string, std::optional<std::string>> seeds;
        if (!o->candidates.empty())
          for (const auto& c : load_candidates(o->candidates)) seeds.emplace(candidate_url(c), c.seed);
        AnalysisConfig cfg;
        cfg.min_embedded_contracts = o->min_contracts;
        std::string text;
        for (const auto& id : list_snapshots(o->corpus)) {
          const auto snap = load_snapshot(o->corpus, id);
          const auto it = seeds.find(snap.url);
          text += to_json_line(analyze_site(snap, reg, it == seeds.end() ? std::nullopt : it->second, cfg)) + "\n";
        }
        emit(o->out, text);
        return kExitOk;
      };
    });
  }

  // features
  {
    auto* cmd = app.add_subcommand("features", "compute the 10-feature matrix");
    struct Opts {
      std::string corpus, analysis, registry, accounts, names, labels, out, provenance;
      bool disable_f5 = false;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--corpus", o->corpus)->required();
    cmd->add_option("--analysis", o->analysis)->required();
    cmd->add_option("--registry", o->registry)->required();
    cmd->add_option("--accounts", o->accounts, "account fixture CSV")->required();
    cmd->add_option("--names", o->names, "contract name fixture CSV")->required();
    cmd->add_option("--labels", o->labels, "CSV domain,label");
    cmd->add_flag("--disable-f5", o->disable_f5);
    cmd->add_option("--out", o->out, "output CSV (default stdout)");
    cmd->add_option("--provenance", o->provenance, "NDJSON of features that fell back to defaults");
    cmd->callback([&, o] {
      run = [&, o] {
        const auto reg = load_registry(o->registry);
        const auto accounts = FixtureAccountProvider::load(o->accounts);
        const auto names = FixtureNameProvider::load(o->names);
        std::optional<std::map<std::string, Label>> labels;
        if (!o->labels.empty()) labels = load_labels(o->labels);
        const auto analyses = load_analyses(o->analysis);
        std::vector<SiteSnapshot> snaps;
        for (const auto& a : analyses) snaps.push_back(load_snapshot(o->corpus, a.snapshot_id));
        FeatureInputs in{&reg, &accounts, &names, labels ? &*labels : nullptr, {o->disable_f5}};
        const auto f = build_features(snaps, analyses, in);
        emit(o->out, serialize_feature_matrix(f.rows));
        if (!o->provenance.empty()) write_file(o->provenance, f.provenance_ndjson);
        return kExitOk;
      };
    });
  }

  // train
  {
    auto* cmd = app.add_subcommand("train", "train a random forest");
    auto features = std::make_shared<std::string>();
    auto model = std::make_shared<std::string>();
    auto flags = std::make_shared<ForestFlags>();
    cmd->add_option("--features", *features, "labeled feature matrix CSV")->required();
    cmd->add_option("--model", *model, "output model JSON")->required();
    flags->attach(cmd);
    cmd->callback([&, features, model, flags] {
      run = [&, features, model, flags] {
        const auto m = train(dataset_from_rows(load_feature_matrix(*features)), flags->resolve());
        save_model(*model, m);
        ojson imp = ojson::object();
        for (const auto& [name, v] : feature_importance(m)) imp[name] = v;
        std::cout << imp.dump() << "\n";
        return kExitOk;
      };
    });
  }

  // cv
  {
    auto* cmd = app.add_subcommand("cv", "cross-validate (k-fold and/or stratified holdout)");
    struct Opts {
      std::string features, out;
      std::size_t k = 10;
      std::uint64_t split_seed = 7;
      double holdout = 0.0;
    };
    auto o = std::make_shared<Opts>();
    auto flags = std::make_shared<ForestFlags>();
    cmd->add_option("--features", o->features)->required();
    cmd->add_option("--k", o->k, "folds");
    cmd->add_option("--split-seed", o->split_seed, "fold assignment seed (default 7)");
    cmd->add_option("--holdout", o->holdout, "also report a stratified holdout with this train fraction (e.g. 0.7)");
    cmd->add_option("--out", o->out, "output JSON (default stdout)");
    flags->attach(cmd);
    cmd->callback([&, o, flags] {
      run = [&, o, flags] {
        const auto data = dataset_from_rows(load_feature_matrix(o->features));
        const auto params = flags->resolve();
        const auto cv = cross_validate(data, o->k, o->split_seed, params);
        ojson j;
        j["k"] = o->k;
        j["split_seed"] = o->split_seed;
        j["seed"] = params.seed;
        j["folds"] = ojson::array();
        for (const auto& m : cv.folds) j["folds"].push_back(ojson::parse(metrics_json(m)));
        j["mean"] = ojson::parse(metrics_json(cv.mean));
        j["warnings"] = cv.warnings;
        if (o->holdout > 0) {
          const auto h = holdout_evaluate(data, o->holdout, o->split_seed, params);
          j["holdout"] = {{"train_fraction", o->holdout},
                          {"train_rows", h.train_rows.size()},
                          {"test_rows", h.test_rows.size()},
                          {"metrics", ojson::parse(metrics_json(h.metrics))}};
        }
        for (const auto& w : cv.warnings) std::cerr << "warning: " << w << "\n";
        emit(o->out, j.dump(2) + "\n");
        return kExitOk;
      };
    });
  }

  // classify
  {
    auto* cmd = app.add_subcommand("classify", "score a feature matrix with a trained model");
    auto o = std::make_shared<std::tuple<std::string, std::string, std::string>>();
    auto& [model, features, out] = *o;
    cmd->add_option("--model", model)->required();
    cmd->add_option("--features", features)->required();
    cmd->add_option("--out", out, "output NDJSON (default stdout)");
    cmd->callback([&, o] {
      run = [&, o] {
        auto& [model, features, out] = *o;
        emit(out, classify_rows(load_model(model), load_feature_matrix(features)));
        return kExitOk;
      };
    });
  }

  // monitor
  {
    auto* cmd = app.add_subcommand("monitor", "poll blocklist, detection and liveness providers");
    struct Opts {
      std::string targets, providers, interval = "10m", horizon = "168h", out;
      bool simulate = false, probe = false;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--targets", o->targets, "targets NDJSON")->required();
    cmd->add_option("--providers", o->providers, "directory of provider fixture CSVs")->required();
    cmd->add_option("--interval", o->interval);
    cmd->add_option("--horizon", o->horizon);
    cmd->add_flag("--simulate", o->simulate, "virtual clock");
    cmd->add_flag("--probe-liveness", o->probe, "add a live liveness prober");
    cmd->add_option("--out", o->out, "event log NDJSON (default stdout)");
    cmd->callback([&, o] {
      run = [&, o] {
        auto providers = load_provider_fixtures(o->providers);
        HttpFetcher http;
        if (o->probe) providers.push_back(std::make_unique<LivenessProber>("liveness-probe", http));
        MonitorConfig cfg;
        cfg.interval = parse_duration(o->interval);
        cfg.horizon = parse_duration(o->horizon);
        cfg.simulate = o->simulate;
        cfg.parallel = parallel;
        emit(o->out, run_monitor(load_targets(o->targets), providers, cfg).to_ndjson());
        return kExitOk;
      };
    });
  }

  // report
  {
    auto* cmd = app.add_subcommand("report", "summaries over a monitor event log");
    cmd->require_subcommand(1);
    auto log_path = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--log", *log_path, "event log NDJSON")->required();
    cmd->add_option("--out", *out, "output (default stdout)");

    auto* cov = cmd->add_subcommand("coverage", "coverage and median detection speed per provider");
    auto cohort = std::make_shared<std::string>();
    cov->add_option("--cohort", *cohort, "nft or regular (default: every cohort in the log)");
    cov->callback([&, log_path, out, cohort] {
      run = [&, log_path, out, cohort] {
        const auto log = MonitorLog::load(*log_path);
        std::vector<std::string> providers;
        for (const auto& s : log.samples())
          if (s.kind == ProviderKind::blocklist &&
              std::find(providers.begin(), providers.end(), s.provider) == providers.end())
            providers.push_back(s.provider);
        std::sort(providers.begin(), providers.end());
        std::set<Cohort> cohorts;
        if (cohort->empty())
          for (const auto& t : log.targets()) cohorts.insert(t.cohort);
        else
          cohorts.insert(parse_cohort(*cohort));
        std::string text = "provider,cohort,n_detected,n_total,coverage,median_speed\n";
        for (const auto& p : providers)
          for (const Cohort c : cohorts) {
            const auto r = coverage_stats(log, p, c);
            text += csv_line({p, std::string(to_string(r.cohort)), std::to_string(r.n_detected),
                              std::to_string(r.n_total), format_double(r.coverage_fraction),
                              format_hhmm(r.median_speed_minutes)});
          }
        emit(*out, text);
        return kExitOk;
      };
    });

    auto* series = cmd->add_subcommand("series", "coverage over elapsed time (CSV)");
    auto series_opts = std::make_shared<std::tuple<std::string, std::string, std::string, std::string>>(
        "", "nft", "1h", "168h");
    series->add_option("--provider", std::get<0>(*series_opts))->required();
    series->add_option("--cohort", std::get<1>(*series_opts));
    series->add_option("--step", std::get<2>(*series_opts));
    series->add_option("--horizon", std::get<3>(*series_opts));
    series->callback([&, log_path, out, series_opts] {
      run = [&, log_path, out, series_opts] {
        auto& [provider, c, step, horizon] = *series_opts;
        const auto points = coverage_series(MonitorLog::load(*log_path), provider, parse_cohort(c),
                                            parse_duration(step), parse_duration(horizon));
        std::string text = "elapsed_minutes,coverage\n";
        for (const auto& p : points) text += csv_line({format_double(p.elapsed_minutes), format_double(p.coverage_fraction)});
        emit(*out, text);
        return kExitOk;
      };
    });

    auto* td = cmd->add_subcommand("takedown", "time until sites went inactive");
    auto td_provider = std::make_shared<std::string>();
    td->add_option("--provider", *td_provider, "liveness provider (default all)");
    td->callback([&, log_path, out, td_provider] {
      run = [&, log_path, out, td_provider] {
        const auto r = takedown_stats(MonitorLog::load(*log_path),
                                      td_provider->empty() ? std::nullopt : std::optional(*td_provider));
        ojson j;
        j["targets"] = ojson::array();
        for (const auto& t : r.targets)
          j["targets"].push_back({{"url", t.url},
                                  {"inactive_after_hours",
                                   t.inactive_after_hours ? ojson(*t.inactive_after_hours) : ojson("still-active")}});
        j["censored"] = r.censored;
        if (r.quartiles)
          j["quartiles_hours"] = {{"min", r.quartiles->min},       {"q1", r.quartiles->q1},
                                  {"median", r.quartiles->median}, {"q3", r.quartiles->q3},
                                  {"max", r.quartiles->max}};
        else
          j["quartiles_hours"] = nullptr;
        emit(*out, j.dump(2) + "\n");
        return kExitOk;
      };
    });

    auto* hist = cmd->add_subcommand("histogram", "distribution of maximum detection counts");
    auto group = std::make_shared<std::string>();
    hist->add_option("--providers", *group, "comma-separated detection providers (default all)");
    hist->callback([&, log_path, out, group] {
      run = [&, log_path, out, group] {
        std::string text = "detections,targets\n";
        for (const auto& [count, n] : detection_histogram(MonitorLog::load(*log_path), list_arg(*group)))
          text += std::to_string(count) + "," + std::to_string(n) + "\n";
        emit(*out, text);
        return kExitOk;
      };
    });
  }

  // chain-report
  {
    auto* cmd = app.add_subcommand("chain-report", "funds received by attacker wallets");
    struct Opts {
      std::string txs, wallets, prices, categories, out, from, to;
      std::vector<std::string> iqr;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--txs", o->txs)->required();
    cmd->add_option("--wallets", o->wallets)->required();
    cmd->add_option("--prices", o->prices)->required();
    cmd->add_option("--categories", o->categories, "CSV wallet,category");
    cmd->add_option("--from", o->from, "window start (RFC 3339, inclusive)");
    cmd->add_option("--to", o->to, "window end (RFC 3339, inclusive)");
    cmd->add_option("--iqr-exclude", o->iqr, "category with 1.5x IQR outlier exclusion (repeatable)");
    cmd->add_option("--out", o->out, "output JSON (default stdout)");
    cmd->callback([&, o] {
      run = [&, o] {
        const auto txs = load_transactions(o->txs);
        const auto prices = PriceTable::load(o->prices);
        TimeWindow window;
        if (!o->from.empty()) window.from = to_epoch(parse_rfc3339(o->from));
        if (!o->to.empty()) window.to = to_epoch(parse_rfc3339(o->to));
        std::vector<WalletSummary> summaries;
        for (const auto& w : load_wallet_list(o->wallets)) summaries.push_back(wallet_summary(txs, w, prices, window));
        std::vector<CategoryStats> cats;
        if (!o->categories.empty()) {
          const auto mapping = load_categories(o->categories);
          std::map<std::string, std::vector<WalletSummary>> grouped;
          for (const auto& s : summaries)
            if (const auto it = mapping.find(s.wallet); it != mapping.end()) grouped[it->second].push_back(s);
          CategoryOptions opts;
          opts.iqr_categories.insert(o->iqr.begin(), o->iqr.end());
          cats = category_stats(grouped, opts);
        }
        emit(o->out, chain_report_json(summaries, cats));
        return kExitOk;
      };
    });
  }

  // promo
  {
    auto* cmd = app.add_subcommand("promo", "promotion-tweet and engagement analytics");
    cmd->require_subcommand(1);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--out", *out, "output (default stdout)");

    auto* parse = cmd->add_subcommand("parse", "extract giveaway structure from tweets");
    auto parse_opts = std::make_shared<std::pair<std::string, std::string>>();
    parse->add_option("--tweets", parse_opts->first, "tweets NDJSON")->required();
    parse->add_option("--patterns", parse_opts->second, "pattern file (default bundled)");
    parse->callback([&, out, parse_opts] {
      run = [&, out, parse_opts] {
        const PromoGrammar grammar =
            parse_opts->second.empty() ? PromoGrammar::bundled() : PromoGrammar::load(parse_opts->second);
        std::string text;
        for (const auto& t : load_tweets(parse_opts->first)) {
          const auto p = parse_promotion_tweet(t.text, t.author, t.id, grammar);
          if (!p) continue;
          ojson j;
          j["id"] = p->id;
          j["promoter"] = p->promoter;
          j["promotee"] = p->promotee;
          j["prize"] = p->prize ? ojson{{"amount", p->prize->amount}, {"currency", p->prize->currency}} : ojson(nullptr);
          j["deadline_seconds"] = p->deadline ? ojson(p->deadline->count()) : ojson(nullptr);
          j["actions"] = ojson::array();
          for (auto a : p->actions) j["actions"].push_back(to_string(a));
          text += j.dump() + "\n";
        }
        emit(*out, text);
        return kExitOk;
      };
    });

    auto* bots = cmd->add_subcommand("bots", "bot fraction per relation and threshold sweep");
    auto bots_opts = std::make_shared<std::tuple<std::string, double, std::string>>("", 0.43, "");
    bots->add_option("--engagement", std::get<0>(*bots_opts), "CSV account_id,bot_score,relation")->required();
    bots->add_option("--threshold", std::get<1>(*bots_opts));
    bots->add_option("--sweep", std::get<2>(*bots_opts), "comma-separated ascending thresholds");
    bots->callback([&, out, bots_opts] {
      run = [&, out, bots_opts] {
        auto& [path, t, sweep] = *bots_opts;
        const auto records = load_engagement(path);
        const auto f = bot_fraction(records, t);
        ojson j;
        j["threshold"] = t;
        j["overall"] = {{"bots", f.overall.bots}, {"total", f.overall.total}, {"fraction", f.overall.fraction}};
        j["by_relation"] = ojson::object();
        for (const auto& [rel, c] : f.by_relation)
          j["by_relation"][std::string(to_string(rel))] = {{"bots", c.bots}, {"total", c.total}, {"fraction", c.fraction}};
        if (!sweep.empty()) {
          std::vector<double> ts;
          for (const auto& s : list_arg(sweep)) ts.push_back(std::stod(s));
          j["sweep"] = ojson::array();
          for (const auto& p : threshold_sweep(records, ts))
            j["sweep"].push_back({{"threshold", p.threshold}, {"bots", p.bots}, {"total", p.total}});
        }
        emit(*out, j.dump(2) + "\n");
        return kExitOk;
      };
    });

    auto* wil = cmd->add_subcommand("wilcoxon", "unpaired Wilcoxon rank-sum test");
    auto wil_opts = std::make_shared<std::tuple<std::string, std::string, std::string>>("", "", "auto");
    wil->add_option("--x", std::get<0>(*wil_opts), "file with one value per line")->required();
    wil->add_option("--y", std::get<1>(*wil_opts), "file with one value per line")->required();
    wil->add_option("--mode", std::get<2>(*wil_opts), "exact, normal or auto")
        ->check(CLI::IsMember({"exact", "normal", "auto"}));
    wil->callback([&, out, wil_opts] {
      run = [&, out, wil_opts] {
        auto& [xp, yp, mode] = *wil_opts;
        const auto x = load_numbers(xp), y = load_numbers(yp);
        WilcoxonMode m = mode == "exact"    ? WilcoxonMode::exact
                         : mode == "normal" ? WilcoxonMode::normal
                         : x.size() + y.size() <= kExactWilcoxonLimit ? WilcoxonMode::exact
                                                                      : WilcoxonMode::normal;
        const auto r = wilcoxon_rank_sum(x, y, m);
        ojson j;
        j["mode"] = m == WilcoxonMode::exact ? "exact" : "normal";
        j["n_x"] = x.size();
        j["n_y"] = y.size();
        j["u"] = r.u;
        j["u_x"] = r.u_x;
        j["p_value"] = r.p_value;
        emit(*out, j.dump(2) + "\n");
        return kExitOk;
      };
    });

    auto* gains = cmd->add_subcommand("gains", "follower-gain statistics and CDF per group");
    auto gains_path = std::make_shared<std::string>();
    gains->add_option("--gains", *gains_path, "CSV collection,group,gain")->required();
    gains->callback([&, out, gains_path] {
      run = [&, out, gains_path] {
        const auto table = CsvTable::load(*gains_path);
        table.require_header({"collection", "group", "gain"});
        std::map<std::string, std::vector<std::uint64_t>> groups;
        for (const auto& row : table.rows()) {
          try {
            std::size_t used = 0;
            const auto v = std::stoull(row.fields[2], &used);
            if (used != row.fields[2].size() || row.fields[2].front() == '-') throw std::invalid_argument("");
            groups[row.fields[1]].push_back(v);
          } catch (const std::logic_error&) {
            throw ParseError("bad gain '" + row.fields[2] + "'", row.line);
          }
        }
        ojson j = ojson::array();
        for (const auto& g : follower_gain_stats(groups)) {
          ojson cdf = ojson::array();
          for (const auto& [v, f] : g.cdf) cdf.push_back({v, f});
          j.push_back({{"group", g.group},
                       {"count", g.summary.count},
                       {"min", g.summary.min},
                       {"max", g.summary.max},
                       {"mean", g.summary.mean},
                       {"median", g.summary.median},
                       {"cdf", std::move(cdf)}});
        }
        emit(*out, j.dump(2) + "\n");
        return kExitOk;
      };
    });

    auto* label = cmd->add_subcommand("label", "rule-based fraud labels for collections");
    auto label_opts = std::make_shared<std::tuple<std::string, std::string, bool>>("", "", false);
    label->add_option("--evidence", std::get<0>(*label_opts), "evidence CSV")->required();
    label->add_option("--now", std::get<1>(*label_opts), "reference time (RFC 3339, default now)");
    label->add_flag("--lenient-rugpull", std::get<2>(*label_opts), "website OR marketplace dead suffices");
    label->callback([&, out, label_opts] {
      run = [&, out, label_opts] {
        auto& [path, now, lenient] = *label_opts;
        LabelOptions opts;
        opts.strict_rugpull = !lenient;
        const Timestamp at = time_or_now(now);
        std::string text = "collection,label\n";
        for (const auto& e : load_evidence(path))
          text += csv_line({e.collection, std::string(to_string(label_collection(e, at, opts)))});
        emit(*out, text);
        return kExitOk;
      };
    });
  }

  // pipeline
  {
    auto* cmd = app.add_subcommand("pipeline", "run squat -> ct-filter -> fetch -> analyze -> features -> classify");
    auto config = std::make_shared<std::string>();
    cmd->add_option("--config", *config, "pipeline config (default $SCOUT_CONFIG)");
    cmd->callback([&, config] {
      run = [&, config] {
        std::string path = *config;
        if (path.empty())
          if (const char* env = std::getenv("SCOUT_CONFIG")) path = env;
        if (path.empty()) throw UsageError("no config given (use --config or SCOUT_CONFIG)");
        const auto source = Config::load(path);
        auto cfg = PipelineConfig::from(source, fs::absolute(path).parent_path());
        cfg.parallel = std::min(cfg.parallel, parallel);
        const auto r = run_pipeline(cfg, source);
        std::cout << r.manifest_path.string() << "\n";
        if (!r.ok) {
          std::cerr << "scout: stage '" << r.failed_stage << "' failed: " << r.message << "\n";
          return kExitStage;
        }
        return kExitOk;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return run ? run() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "scout: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "scout: " << e.what();
    if (e.line()) std::cerr << " (line " << e.line() << ")";
    std::cerr << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "scout: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "scout: " << e.what() << "\n";
    return kExitData;
  }
}
