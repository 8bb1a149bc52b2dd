#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scout/classifier.hpp"
#include "scout/config.hpp"
#include "scout/ctingest.hpp"
#include "scout/features.hpp"
#include "scout/registry.hpp"
#include "scout/siteanalysis.hpp"
#include "scout/snapshot.hpp"
#include "scout/squatgen.hpp"

namespace scout {

// Building blocks shared by the CLI subcommands and the pipeline.

// Candidates for the top_n registry seeds (all when 0), merged across seeds;
// the better-ranked seed keeps a shared candidate.
std::vector<CandidateDomain> squat_registry(const CollectionRegistry& reg, const std::vector<RuleKind>& rules,
                                            const std::vector<std::string>& terms, std::size_t top_n,
                                            Timestamp first_seen);

struct CtFilterResult {
  std::vector<CandidateDomain> hits;
  CtFilterStats stats;
};
CtFilterResult ct_filter_file(const std::filesystem::path& stream, const std::vector<CandidateDomain>& candidates,
                              const std::vector<std::string>& terms, Timestamp since);

std::string candidate_url(const CandidateDomain& c);

// domain -> label from a CSV `domain,label`.
std::map<std::string, Label> load_labels(const std::filesystem::path& path);

struct FeatureInputs {
  const CollectionRegistry* registry = nullptr;
  const AccountProvider* accounts = nullptr;
  const ContractNameProvider* names = nullptr;
  const std::map<std::string, Label>* labels = nullptr;  // optional
  FeatureConfig config;
};

struct FeatureOutput {
  std::vector<FeatureRow> rows;
  std::string provenance_ndjson;  // {"snapshot_id","feature","note"} lines
};
// Rows follow `analyses` order; each analysis must have its snapshot in `snapshots`.
FeatureOutput build_features(const std::vector<SiteSnapshot>& snapshots, const std::vector<SiteAnalysis>& analyses,
                             const FeatureInputs& in);

// NDJSON {"snapshot_id","verdict","probability"} per row.
std::string classify_rows(const ForestModel& model, const std::vector<FeatureRow>& rows);

struct PipelineConfig {
  std::filesystem::path output_dir;
  std::filesystem::path registry;
  std::vector<RuleKind> rules;
  std::vector<std::string> terms;
  std::size_t top_n = 0;
  std::filesystem::path ct_stream;
  std::optional<Timestamp> ct_since;
  bool fetch_fixture = true;
  std::filesystem::path fixture_root;
  bool verify_tls = true;
  FetchLimits limits;
  AnalysisConfig analysis;
  std::filesystem::path accounts;
  std::filesystem::path names;
  std::optional<std::filesystem::path> labels;
  FeatureConfig features;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> training;
  ForestParams forest;
  std::uint64_t seed = 7;
  Timestamp run_at{};  // pinned clock for every timestamp the pipeline writes
  std::size_t parallel = 4;

  // Relative paths resolve against base_dir. Throws UsageError for missing
  // keys, bad values or paths that do not exist.
  static PipelineConfig from(const Config& cfg, const std::filesystem::path& base_dir);
};

struct ManifestEntry {
  std::string path;  // relative to the output directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct PipelineResult {
  bool ok = true;
  std::string failed_stage;
  std::string message;
  std::vector<std::string> completed_stages;
  std::vector<ManifestEntry> manifest;
  std::filesystem::path manifest_path;
};

// squat -> ct-filter -> dedupe -> fetch -> analyze -> features -> classify.
// Writes manifest.json (content hashes, deterministic) and manifest.meta.json
// (wall-clock timings). A failing stage stops the run with a partial manifest.
PipelineResult run_pipeline(const PipelineConfig& cfg, const Config& source);

}  // namespace scout
