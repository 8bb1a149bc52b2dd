#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "scout/common.hpp"
#include "scout/url.hpp"

namespace scout {

enum class TransportStatus {
  ok,
  dns_failure,
  connect_failure,
  timeout,
  tls_failure,
  too_many_redirects,
  other_failure,
};

std::string_view to_string(TransportStatus status);
TransportStatus parse_transport_status(std::string_view text);

struct FetchLimits {
  std::size_t max_bytes = 5 * 1024 * 1024;
  Seconds timeout{20};
  std::size_t max_scripts = 10;
  int max_redirects = 5;
};

struct HttpResponse {
  TransportStatus transport = TransportStatus::ok;
  int status = 0;
  std::string body;
  bool truncated = false;
  std::string location;  // Location header, if any
};

// One GET without redirect following. Implementations must be safe to call
// concurrently.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual HttpResponse get(const Url& url, const FetchLimits& limits) = 0;
};

// Network fetcher backed by cpp-httplib.
class HttpFetcher final : public Fetcher {
 public:
  explicit HttpFetcher(bool verify_tls = true) : verify_tls_(verify_tls) {}
  HttpResponse get(const Url& url, const FetchLimits& limits) override;

 private:
  bool verify_tls_;
};

// Serves a directory tree as if it were the web: <root>/<host>/<path>, with
// "/" mapped to index.html. Unknown hosts are DNS failures, missing files 404.
// An optional <root>/<host>/_redirects file holds "<path> <location>" lines.
class FixtureFetcher final : public Fetcher {
 public:
  explicit FixtureFetcher(std::filesystem::path root) : root_(std::move(root)) {}
  HttpResponse get(const Url& url, const FetchLimits& limits) override;

 private:
  std::filesystem::path root_;
};

struct ScriptEntry {
  std::string url;
  std::string body;
  friend bool operator==(const ScriptEntry&, const ScriptEntry&) = default;
};

// Fingerprint of content with no tokens.
inline constexpr std::uint64_t kNullFingerprint = 0;

struct SiteSnapshot {
  std::string url;        // as requested
  std::string final_url;  // after redirects
  Timestamp fetched_at{};
  TransportStatus transport = TransportStatus::ok;
  int http_status = 0;
  bool truncated = false;
  std::string html;
  std::vector<ScriptEntry> scripts;  // same-origin <script src> targets, document order
  std::uint64_t content_fingerprint = kNullFingerprint;
  std::string snapshot_id;

  bool reachable() const { return transport == TransportStatus::ok; }

  friend bool operator==(const SiteSnapshot&, const SiteSnapshot&) = default;
};

// Alphanumeric runs, lowercased, in order.
std::vector<std::string> tokenize(std::string_view text);
std::unordered_set<std::string> token_set(const SiteSnapshot& snapshot);

// FNV-1a-64 over the sorted token multiset (each token followed by a 0x00
// separator), passed through the murmur3 fmix64 finalizer. Tokens come from
// html and every script body; empty content yields kNullFingerprint.
std::uint64_t content_fingerprint(const SiteSnapshot& snapshot);
std::uint64_t fingerprint_tokens(std::vector<std::string> tokens);

// Hex SHA-256 over a length-prefixed encoding of (url, html, scripts).
std::string compute_snapshot_id(const SiteSnapshot& snapshot);

// Fills content_fingerprint and snapshot_id from the content fields.
void seal(SiteSnapshot& snapshot);

// Jaccard similarity of two token sets; two empty sets are identical (1.0).
double jaccard(const std::unordered_set<std::string>& a, const std::unordered_set<std::string>& b);

// Fetches a page and its same-origin scripts. Transport failures are reported
// in the returned snapshot, never thrown. Throws DataError for non-http(s) URLs.
SiteSnapshot fetch_snapshot(std::string_view url, const FetchLimits& limits, Fetcher& fetcher, Timestamp fetched_at);

// Fetches with at most `parallel` concurrent workers; results keep input order.
std::vector<SiteSnapshot> fetch_all(std::span<const std::string> urls, const FetchLimits& limits, Fetcher& fetcher,
                                    Timestamp fetched_at, std::size_t parallel);

// Corpus layout: <corpus>/<snapshot_id>/{meta.json,page.html,scripts/<n>.js}.
// Storing is idempotent: an existing snapshot directory is left untouched.
std::string store_snapshot(const std::filesystem::path& corpus, const SiteSnapshot& snapshot);
// Throws NotFoundError for unknown ids and DataError when stored content no
// longer hashes to its id.
SiteSnapshot load_snapshot(const std::filesystem::path& corpus, std::string_view snapshot_id);
std::vector<std::string> list_snapshots(const std::filesystem::path& corpus);

}  // namespace scout
