#include "scout/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <nlohmann/json.hpp>

namespace scout {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::vector<CandidateDomain> squat_registry(const CollectionRegistry& reg, const std::vector<RuleKind>& rules,
                                            const std::vector<std::string>& terms, std::size_t top_n,
                                            Timestamp first_seen) {
  std::vector<PermutationRule> table;
  for (auto kind : rules) {
    auto r = PermutationRule::with_defaults(kind);
    if (kind == RuleKind::term_affix && !terms.empty()) r.terms = terms;
    table.push_back(std::move(r));
  }
  std::vector<std::vector<CandidateDomain>> per_seed;
  for (const auto& rec : reg.top(top_n == 0 ? reg.size() : top_n)) {
    PermuteContext ctx;
    ctx.seed_slug = rec.slug;
    ctx.first_seen = first_seen;
    per_seed.push_back(permute_domain(rec.official_domain, table, ctx));
  }
  auto merged = dedupe_candidates(per_seed).candidates;
  // A look-alike of one collection may be another collection's real domain.
  std::erase_if(merged, [&](const CandidateDomain& c) { return reg.find_domain(c.domain) != nullptr; });
  return merged;
}

CtFilterResult ct_filter_file(const fs::path& stream, const std::vector<CandidateDomain>& candidates,
                              const std::vector<std::string>& terms, Timestamp since) {
  std::ifstream in(stream, std::ios::binary);
  if (!in) throw IoError("cannot open " + stream.string());
  CtStreamFilter filter(CtWatch::from(candidates, terms), since);
  CtFilterResult out;
  for (std::string line; std::getline(in, line);) {
    if (trim(line).empty()) continue;
    filter.consume_line(line, out.hits);
  }
  out.stats = filter.stats();
  return out;
}

std::string candidate_url(const CandidateDomain& c) { return "https://" + c.domain + "/"; }

std::map<std::string, Label> load_labels(const fs::path& path) {
  const auto table = CsvTable::load(path);
  table.require_header({"domain", "label"});
  std::map<std::string, Label> out;
  for (const auto& row : table.rows()) {
    try {
      if (!out.emplace(to_lower(trim(row.fields[0])), parse_label(trim(row.fields[1]))).second)
        throw ParseError("domain listed twice: " + row.fields[0]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), row.line);
    }
  }
  return out;
}

FeatureOutput build_features(const std::vector<SiteSnapshot>& snapshots, const std::vector<SiteAnalysis>& analyses,
                             const FeatureInputs& in) {
  std::map<std::string, const SiteSnapshot*> by_id;
  for (const auto& s : snapshots) by_id.emplace(s.snapshot_id, &s);
  FeatureOutput out;
  for (const auto& a : analyses) {
    const auto it = by_id.find(a.snapshot_id);
    if (it == by_id.end()) throw DataError("analysis refers to unknown snapshot " + a.snapshot_id);
    const auto& snap = *it->second;
    auto result = extract_features(snap, a, *in.registry, *in.accounts, *in.names, in.config);
    if (in.labels) {
      const auto host = parse_url(snap.url).host;
      if (const auto l = in.labels->find(host); l != in.labels->end()) result.features.label = l->second;
    }
    for (const auto& p : result.provenance) {
      ojson j;
      j["snapshot_id"] = a.snapshot_id;
      j["feature"] = p.feature;
      j["note"] = p.note;
      out.provenance_ndjson += j.dump() + "\n";
    }
    out.rows.push_back({a.snapshot_id, result.features});
  }
  return out;
}

std::string classify_rows(const ForestModel& model, const std::vector<FeatureRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    const auto v = r.features.values();
    const auto p = predict(model, v);
    ojson j;
    j["snapshot_id"] = r.snapshot_id;
    j["verdict"] = p.phishing ? "phishing" : "benign";
    j["probability"] = p.probability;
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("config: " + what + " must be a non-negative integer, got '" + text + "'");
  }
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& s : split(text, ','))
    if (!trim(s).empty()) out.push_back(to_lower(trim(s)));
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from(const Config& cfg, const fs::path& base_dir) {
  PipelineConfig p;
  auto path_of = [&](std::string_view section, std::string_view key, bool must_exist) -> std::optional<fs::path> {
    const auto v = cfg.get(section, key);
    if (!v || v->empty()) return std::nullopt;
    fs::path path = *v;
    if (path.is_relative()) path = base_dir / path;
    path = path.lexically_normal();
    if (must_exist && !fs::exists(path))
      throw UsageError("config: [" + std::string(section) + "] " + std::string(key) + " = " + *v + " does not exist");
    return path;
  };
  auto required = [&](std::string_view section, std::string_view key) {
    auto path = path_of(section, key, true);
    if (!path) throw UsageError("config: missing [" + std::string(section) + "] " + std::string(key));
    return *path;
  };
  auto number = [&](std::string_view section, std::string_view key, std::uint64_t fallback) {
    const auto v = cfg.get(section, key);
    return v ? parse_u64(*v, "[" + std::string(section) + "] " + std::string(key)) : fallback;
  };
  auto flag = [&](std::string_view section, std::string_view key, bool fallback) {
    const auto v = cfg.get(section, key);
    if (!v) return fallback;
    try {
      return parse_bool(*v);
    } catch (const ParseError&) {
      throw UsageError("config: [" + std::string(section) + "] " + std::string(key) + " must be a boolean");
    }
  };

  try {
    const auto out = path_of("pipeline", "output", false);
    if (!out) throw UsageError("config: missing [pipeline] output");
    p.output_dir = *out;
    p.seed = number("pipeline", "seed", 7);
    p.parallel = std::max<std::uint64_t>(1, number("pipeline", "parallel", 4));
    if (const auto run_at = cfg.get("pipeline", "run_at"))
      p.run_at = parse_rfc3339(*run_at);
    else
      p.run_at = std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now());

    p.registry = required("registry", "path");

    p.rules = parse_rule_list(cfg.get_or("squat", "rules", "all"));
    p.terms = parse_list(cfg.get_or("squat", "terms", "nft,claim,mint"));
    p.top_n = number("squat", "top", 0);

    p.ct_stream = required("ct", "stream");
    if (const auto since = cfg.get("ct", "since")) p.ct_since = parse_rfc3339(*since);

    const std::string mode = cfg.get_or("fetch", "mode", "fixture");
    if (mode != "fixture" && mode != "live") throw UsageError("config: [fetch] mode must be fixture or live");
    p.fetch_fixture = mode == "fixture";
    if (p.fetch_fixture) p.fixture_root = required("fetch", "fixture_root");
    p.verify_tls = flag("fetch", "verify_tls", true);
    p.limits.max_bytes = number("fetch", "max_bytes", p.limits.max_bytes);
    p.limits.max_scripts = number("fetch", "max_scripts", p.limits.max_scripts);
    p.limits.max_redirects = number("fetch", "max_redirects", p.limits.max_redirects);
    if (const auto t = cfg.get("fetch", "timeout")) p.limits.timeout = parse_duration(*t);

    p.analysis.min_embedded_contracts = number("analyze", "min_embedded_contracts", p.analysis.min_embedded_contracts);

    p.accounts = required("features", "accounts");
    p.names = required("features", "names");
    p.labels = path_of("features", "labels", true);
    p.features.disable_f5 = flag("features", "disable_f5", false);

    p.model = path_of("classifier", "model", true);
    p.training = path_of("classifier", "training", true);
    if (!p.model && !p.training) throw UsageError("config: [classifier] needs model or training");
    p.forest.n_trees = number("classifier", "n_trees", p.forest.n_trees);
    p.forest.max_depth = number("classifier", "max_depth", p.forest.max_depth);
    p.forest.min_leaf = number("classifier", "min_leaf", p.forest.min_leaf);
    p.forest.mtry = number("classifier", "mtry", p.forest.mtry);
    p.forest.seed = p.seed;
    p.forest.threads = p.parallel;
  } catch (const ParseError& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return p;
}

namespace {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path root) : root_(std::move(root)) {}

  void write(const std::string& rel, std::string_view bytes) {
    write_file(root_ / rel, bytes);
    record(rel);
  }
  void record(const std::string& rel) {
    if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
  }
  void record_tree(const std::string& rel_dir) {
    for (const auto& e : fs::recursive_directory_iterator(root_ / rel_dir))
      if (e.is_regular_file()) record(fs::relative(e.path(), root_).generic_string());
  }

  std::vector<ManifestEntry> manifest() const {
    std::vector<ManifestEntry> out;
    for (const auto& rel : files_) {
      const std::string bytes = read_file(root_ / rel);
      out.push_back({rel, sha256_hex(bytes), bytes.size()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

std::string join_lines(const std::vector<CandidateDomain>& cs) {
  std::string out;
  for (const auto& c : cs) out += to_json_line(c) + "\n";
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const Config& source) {
  using clock = std::chrono::steady_clock;
  const auto started_wall = std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now());
  fs::create_directories(cfg.output_dir);
  ArtifactWriter out(cfg.output_dir);
  PipelineResult result;
  ojson timings = ojson::object();

  CollectionRegistry registry;
  std::vector<CandidateDomain> squat, hits;
  std::vector<SiteSnapshot> snapshots;
  std::vector<SiteAnalysis> analyses;
  std::vector<FeatureRow> rows;

  auto stage = [&](const std::string& name, auto&& body) {
    if (!result.ok) return;
    const auto t0 = clock::now();
    try {
      body();
      result.completed_stages.push_back(name);
    } catch (const std::exception& e) {
      result.ok = false;
      result.failed_stage = name;
      result.message = e.what();
    }
    timings[name] = std::chrono::duration<double>(clock::now() - t0).count();
  };

  stage("squat", [&] {
    registry = load_registry(cfg.registry);
    squat = squat_registry(registry, cfg.rules, cfg.terms, cfg.top_n, cfg.run_at);
    out.write("candidates.ndjson", join_lines(squat));
  });
  stage("ct-filter", [&] {
    auto r = ct_filter_file(cfg.ct_stream, squat, cfg.terms, cfg.ct_since.value_or(Timestamp{}));
    hits = std::move(r.hits);
    out.write("ct_hits.ndjson", join_lines(hits));
  });
  stage("dedupe", [&] {
    const std::vector<std::vector<CandidateDomain>> streams{squat, hits};
    const auto merged = dedupe_candidates(streams);
    out.write("candidates_merged.ndjson", join_lines(merged.candidates));
  });
  stage("fetch", [&] {
    std::vector<std::string> urls;
    for (const auto& h : hits) urls.push_back(candidate_url(h));
    std::unique_ptr<Fetcher> fetcher;
    if (cfg.fetch_fixture)
      fetcher = std::make_unique<FixtureFetcher>(cfg.fixture_root);
    else
      fetcher = std::make_unique<HttpFetcher>(cfg.verify_tls);
    snapshots = fetch_all(urls, cfg.limits, *fetcher, cfg.run_at, cfg.parallel);
    fs::create_directories(cfg.output_dir / "corpus");
    for (const auto& s : snapshots) out.record_tree("corpus/" + store_snapshot(cfg.output_dir / "corpus", s));
  });
  stage("analyze", [&] {
    std::map<std::string, std::optional<std::string>> seeds;
    for (const auto& h : hits) seeds.emplace(candidate_url(h), h.seed);
    std::string text;
    for (const auto& s : snapshots) {
      analyses.push_back(analyze_site(s, registry, seeds[s.url], cfg.analysis));
      text += to_json_line(analyses.back()) + "\n";
    }
    out.write("analysis.ndjson", text);
  });
  stage("features", [&] {
    const auto accounts = FixtureAccountProvider::load(cfg.accounts);
    const auto names = FixtureNameProvider::load(cfg.names);
    std::optional<std::map<std::string, Label>> labels;
    if (cfg.labels) labels = load_labels(*cfg.labels);
    FeatureInputs in{&registry, &accounts, &names, labels ? &*labels : nullptr, cfg.features};
    auto f = build_features(snapshots, analyses, in);
    rows = std::move(f.rows);
    out.write("features.csv", serialize_feature_matrix(rows));
    out.write("features_provenance.ndjson", f.provenance_ndjson);
  });
  stage("classify", [&] {
    ForestModel model;
    if (cfg.model) {
      model = load_model(*cfg.model);
    } else {
      model = train(dataset_from_rows(load_feature_matrix(*cfg.training)), cfg.forest);
      out.write("model.json", model_to_json(model));
    }
    out.write("verdicts.ndjson", classify_rows(model, rows));
  });

  result.manifest = out.manifest();
  ojson m;
  m["format"] = "scout-manifest-v1";
  m["seed"] = cfg.seed;
  m["run_at"] = format_rfc3339(cfg.run_at);
  // The output location does not change what is produced.
  Config hashed = source;
  hashed.erase("pipeline", "output");
  m["config_sha256"] = sha256_hex(hashed.serialize());
  m["status"] = result.ok ? "ok" : "failed";
  m["failed_stage"] = result.ok ? ojson(nullptr) : ojson(result.failed_stage);
  m["stages"] = result.completed_stages;
  m["files"] = ojson::array();
  for (const auto& e : result.manifest) m["files"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  result.manifest_path = cfg.output_dir / "manifest.json";
  write_file(result.manifest_path, m.dump(2) + "\n");

  ojson meta;
  meta["started_at"] = format_rfc3339(started_wall);
  meta["finished_at"] = format_rfc3339(std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now()));
  meta["stage_seconds"] = std::move(timings);
  if (!result.ok) meta["error"] = result.message;
  write_file(cfg.output_dir / "manifest.meta.json", meta.dump(2) + "\n");
  return result;
}

}  // namespace scout
