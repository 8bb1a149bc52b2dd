#include "scout/snapshot.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>
#include <thread>

#include "scout/html.hpp"

namespace scout {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<TransportStatus, std::string_view> kTransportNames[] = {
    {TransportStatus::ok, "ok"},
    {TransportStatus::dns_failure, "dns_failure"},
    {TransportStatus::connect_failure, "connect_failure"},
    {TransportStatus::timeout, "timeout"},
    {TransportStatus::tls_failure, "tls_failure"},
    {TransportStatus::too_many_redirects, "too_many_redirects"},
    {TransportStatus::other_failure, "other_failure"},
};

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

bool same_origin(const Url& a, const Url& b) {
  return a.scheme == b.scheme && a.host == b.host && a.effective_port() == b.effective_port();
}

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

// GET with redirect following. `final_url` receives the last URL requested.
HttpResponse get_following(Fetcher& fetcher, Url url, const FetchLimits& limits, Url& final_url) {
  for (int hop = 0;; ++hop) {
    HttpResponse resp = fetcher.get(url, limits);
    final_url = url;
    if (resp.transport != TransportStatus::ok || !is_redirect(resp.status) || resp.location.empty()) return resp;
    if (hop >= limits.max_redirects) {
      resp.transport = TransportStatus::too_many_redirects;
      resp.body.clear();
      return resp;
    }
    try {
      url = resolve_url(url, resp.location);
    } catch (const ParseError&) {
      return resp;
    }
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string_view to_string(TransportStatus status) {
  for (const auto& [s, name] : kTransportNames)
    if (s == status) return name;
  return "other_failure";
}

TransportStatus parse_transport_status(std::string_view text) {
  for (const auto& [s, name] : kTransportNames)
    if (name == text) return s;
  throw ParseError("unknown transport status '" + std::string(text) + "'");
}

HttpResponse FixtureFetcher::get(const Url& url, const FetchLimits& limits) {
  HttpResponse resp;
  const fs::path host_dir = root_ / url.host;
  if (url.host.empty() || !fs::is_directory(host_dir)) {
    resp.transport = TransportStatus::dns_failure;
    return resp;
  }
  std::string path = url.path.substr(0, url.path.find('?'));
  if (fs::exists(host_dir / "_redirects")) {
    for (const auto& line : split(read_file(host_dir / "_redirects"), '\n')) {
      const auto parts = split(trim(line), ' ');
      if (parts.size() == 2 && parts[0] == path) {
        resp.status = 302;
        resp.location = parts[1];
        return resp;
      }
    }
  }
  if (path.empty() || path.back() == '/') path += "index.html";
  const fs::path file = host_dir / fs::path(path.substr(1)).lexically_normal();
  if (path.find("..") != std::string::npos || !fs::is_regular_file(file)) {
    resp.status = 404;
    resp.body = "not found";
    return resp;
  }
  resp.status = 200;
  resp.body = read_file(file);
  if (resp.body.size() > limits.max_bytes) {
    resp.body.resize(limits.max_bytes);
    resp.truncated = true;
  }
  return resp;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

namespace {

std::vector<std::string> all_tokens(const SiteSnapshot& s) {
  auto tokens = tokenize(s.html);
  for (const auto& script : s.scripts) {
    auto more = tokenize(script.body);
    tokens.insert(tokens.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  return tokens;
}

}  // namespace

std::unordered_set<std::string> token_set(const SiteSnapshot& snapshot) {
  auto tokens = all_tokens(snapshot);
  return {std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end())};
}

std::uint64_t fingerprint_tokens(std::vector<std::string> tokens) {
  if (tokens.empty()) return kNullFingerprint;
  std::sort(tokens.begin(), tokens.end());
  std::uint64_t h = kFnvOffset;
  for (const auto& t : tokens) {
    for (unsigned char c : t) {
      h ^= c;
      h *= kFnvPrime;
    }
    h *= kFnvPrime;  // 0x00 separator: xor with zero is a no-op
  }
  return fmix64(h);
}

std::uint64_t content_fingerprint(const SiteSnapshot& snapshot) { return fingerprint_tokens(all_tokens(snapshot)); }

std::string compute_snapshot_id(const SiteSnapshot& s) {
  std::string enc = "scout-snapshot-v1\n";
  auto put = [&](std::string_view field) {
    enc += std::to_string(field.size());
    enc.push_back(':');
    enc.append(field);
  };
  put(s.url);
  put(s.html);
  enc += std::to_string(s.scripts.size()) + "\n";
  for (const auto& sc : s.scripts) {
    put(sc.url);
    put(sc.body);
  }
  return sha256_hex(enc);
}

void seal(SiteSnapshot& snapshot) {
  snapshot.content_fingerprint = content_fingerprint(snapshot);
  snapshot.snapshot_id = compute_snapshot_id(snapshot);
}

double jaccard(const std::unordered_set<std::string>& a, const std::unordered_set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::size_t inter = 0;
  for (const auto& t : small) inter += large.count(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

SiteSnapshot fetch_snapshot(std::string_view url_text, const FetchLimits& limits, Fetcher& fetcher,
                            Timestamp fetched_at) {
  const Url url = parse_url(url_text);
  if (url.scheme != "http" && url.scheme != "https")
    throw DataError("fetch requires an http or https URL: '" + std::string(url_text) + "'");
  SiteSnapshot snap;
  snap.url = url.str();
  snap.fetched_at = fetched_at;
  Url final_url = url;
  HttpResponse page = get_following(fetcher, url, limits, final_url);
  snap.final_url = final_url.str();
  snap.transport = page.transport;
  snap.http_status = page.status;
  if (page.transport != TransportStatus::ok) {
    seal(snap);
    return snap;
  }
  snap.html = std::move(page.body);
  snap.truncated = page.truncated;
  if (snap.html.size() > limits.max_bytes) {
    snap.html.resize(limits.max_bytes);
    snap.truncated = true;
  }

  std::vector<Url> targets;
  for (const auto& tag : html::find_start_tags(snap.html, "script")) {
    const auto src = tag.attr("src");
    if (!src || trim(*src).empty()) continue;
    Url target;
    try {
      target = resolve_url(final_url, *src);
    } catch (const ParseError&) {
      continue;
    }
    if (!same_origin(target, final_url)) continue;
    if (std::find(targets.begin(), targets.end(), target) != targets.end()) continue;
    if (targets.size() >= limits.max_scripts) break;
    targets.push_back(std::move(target));
  }
  for (const auto& target : targets) {
    Url script_final = target;
    HttpResponse resp = get_following(fetcher, target, limits, script_final);
    if (resp.transport != TransportStatus::ok || resp.status < 200 || resp.status >= 300) continue;
    if (!same_origin(script_final, final_url)) continue;
    if (resp.body.size() > limits.max_bytes) resp.body.resize(limits.max_bytes);
    snap.scripts.push_back({target.str(), std::move(resp.body)});
  }
  seal(snap);
  return snap;
}

std::vector<SiteSnapshot> fetch_all(std::span<const std::string> urls, const FetchLimits& limits, Fetcher& fetcher,
                                    Timestamp fetched_at, std::size_t parallel) {
  std::vector<SiteSnapshot> out(urls.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < urls.size();) {
      try {
        out[i] = fetch_snapshot(urls[i], limits, fetcher, fetched_at);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(urls.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::string store_snapshot(const fs::path& corpus, const SiteSnapshot& snapshot) {
  SiteSnapshot s = snapshot;
  seal(s);
  const fs::path dir = corpus / s.snapshot_id;
  if (fs::exists(dir / "meta.json")) return s.snapshot_id;

  nlohmann::ordered_json meta;
  meta["snapshot_id"] = s.snapshot_id;
  meta["url"] = s.url;
  meta["final_url"] = s.final_url;
  meta["fetched_at"] = format_rfc3339(s.fetched_at);
  meta["transport"] = to_string(s.transport);
  meta["http_status"] = s.http_status;
  meta["truncated"] = s.truncated;
  meta["content_fingerprint"] = hex64(s.content_fingerprint);
  nlohmann::ordered_json scripts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.scripts.size(); ++i)
    scripts.push_back({{"file", "scripts/" + std::to_string(i) + ".js"}, {"url", s.scripts[i].url}});
  meta["scripts"] = std::move(scripts);

  // Write into a private staging directory, then publish with one rename.
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path staging = corpus / (".staging-" + s.snapshot_id.substr(0, 16) + "-" + hex64(rng()));
  fs::create_directories(staging / "scripts");
  write_file(staging / "page.html", s.html);
  for (std::size_t i = 0; i < s.scripts.size(); ++i)
    write_file(staging / "scripts" / (std::to_string(i) + ".js"), s.scripts[i].body);
  write_file(staging / "meta.json", meta.dump(2) + "\n");
  std::error_code ec;
  fs::rename(staging, dir, ec);
  if (ec) {
    fs::remove_all(staging);
    if (!fs::exists(dir / "meta.json")) throw IoError("cannot publish snapshot " + dir.string() + ": " + ec.message());
  }
  return s.snapshot_id;
}

SiteSnapshot load_snapshot(const fs::path& corpus, std::string_view snapshot_id) {
  const fs::path dir = corpus / std::string(snapshot_id);
  if (snapshot_id.empty() || !fs::exists(dir / "meta.json"))
    throw NotFoundError("snapshot '" + std::string(snapshot_id) + "' not found in " + corpus.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    SiteSnapshot s;
    s.url = meta.at("url").get<std::string>();
    s.final_url = meta.at("final_url").get<std::string>();
    s.fetched_at = parse_rfc3339(meta.at("fetched_at").get<std::string>());
    s.transport = parse_transport_status(meta.at("transport").get<std::string>());
    s.http_status = meta.at("http_status").get<int>();
    s.truncated = meta.at("truncated").get<bool>();
    s.html = read_file(dir / "page.html");
    for (const auto& entry : meta.at("scripts"))
      s.scripts.push_back({entry.at("url").get<std::string>(), read_file(dir / entry.at("file").get<std::string>())});
    seal(s);
    if (s.snapshot_id != snapshot_id)
      throw DataError("snapshot " + std::string(snapshot_id) + " content does not match its id");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt meta.json for snapshot " + std::string(snapshot_id) + ": " + e.what());
  }
}

std::vector<std::string> list_snapshots(const fs::path& corpus) {
  std::vector<std::string> ids;
  if (!fs::is_directory(corpus)) return ids;
  for (const auto& entry : fs::directory_iterator(corpus)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && name.front() != '.' && fs::exists(entry.path() / "meta.json")) ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace scout
