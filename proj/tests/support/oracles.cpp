#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace oracle {

namespace {

using Lanes = std::uint64_t[5][5];

std::uint64_t rotl(std::uint64_t v, unsigned n) { return n == 0 ? v : (v << n) | (v >> (64 - n)); }

// rc(t) from the 8-bit LFSR x^8 + x^6 + x^5 + x^4 + 1.
bool rc_bit(unsigned t) {
  if (t % 255 == 0) return true;
  bool r[9] = {true, false, false, false, false, false, false, false, false};
  for (unsigned i = 1; i <= t % 255; ++i) {
    for (int k = 8; k > 0; --k) r[k] = r[k - 1];
    r[0] = false;
    r[0] ^= r[8];
    r[4] ^= r[8];
    r[5] ^= r[8];
    r[6] ^= r[8];
  }
  return r[0];
}

void keccak_f(Lanes& a) {
  unsigned rho[5][5] = {};
  for (unsigned t = 0, x = 1, y = 0; t < 24; ++t) {
    rho[x][y] = ((t + 1) * (t + 2) / 2) % 64;
    const unsigned nx = y, ny = (2 * x + 3 * y) % 5;
    x = nx;
    y = ny;
  }
  for (unsigned round = 0; round < 24; ++round) {
    std::uint64_t c[5], d[5];
    for (int x = 0; x < 5; ++x) c[x] = a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4];
    for (int x = 0; x < 5; ++x) d[x] = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) a[x][y] ^= d[x];

    Lanes b = {};
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) b[y][(2 * x + 3 * y) % 5] = rotl(a[x][y], rho[x][y]);

    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) a[x][y] = b[x][y] ^ (~b[(x + 1) % 5][y] & b[(x + 2) % 5][y]);

    std::uint64_t rc = 0;
    for (unsigned j = 0; j < 7; ++j)
      if (rc_bit(j + 7 * round)) rc |= std::uint64_t{1} << ((1u << j) - 1);
    a[0][0] ^= rc;
  }
}

}  // namespace

std::array<std::uint8_t, 32> keccak256(const std::string& message) {
  constexpr std::size_t rate = 136;
  std::vector<std::uint8_t> padded(message.begin(), message.end());
  padded.push_back(0x01);
  while (padded.size() % rate != 0) padded.push_back(0x00);
  padded.back() |= 0x80;

  Lanes a = {};
  for (std::size_t off = 0; off < padded.size(); off += rate) {
    for (std::size_t i = 0; i < rate; ++i) {
      const std::size_t lane = i / 8;
      a[lane % 5][lane / 5] ^= std::uint64_t{padded[off + i]} << (8 * (i % 8));
    }
    keccak_f(a);
  }
  std::array<std::uint8_t, 32> out{};
  for (std::size_t i = 0; i < 32; ++i) {
    const std::size_t lane = i / 8;
    out[i] = static_cast<std::uint8_t>(a[lane % 5][lane / 5] >> (8 * (i % 8)));
  }
  return out;
}

std::string checksum(const std::string& lower_body) {
  const auto h = keccak256(lower_body);
  std::string out = "0x";
  for (std::size_t i = 0; i < lower_body.size(); ++i) {
    const unsigned nibble = (h[i / 2] >> (i % 2 == 0 ? 4 : 0)) & 0xf;
    const char c = lower_body[i];
    out += (nibble >= 8 && c >= 'a' && c <= 'f') ? static_cast<char>(c - 32) : c;
  }
  return out;
}

std::optional<Split> best_split(const scout::Dataset& data, const std::vector<std::size_t>& rows) {
  using i128 = __int128;
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  std::int64_t p = 0;
  for (auto r : rows) p += data.y[r];
  if (p == 0 || p == n) return std::nullopt;
  const std::int64_t b = n - p;

  std::optional<Split> best;
  i128 best_num = 0, best_den = 1;
  for (std::size_t f = 0; f < data.arity(); ++f) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(data.x[r][f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = (values[i] + values[i + 1]) / 2.0;
      std::int64_t nl = 0, pl = 0;
      for (auto r : rows)
        if (data.x[r][f] <= t) {
          ++nl;
          pl += data.y[r];
        }
      const std::int64_t nr = n - nl, pr = p - pl, bl = nl - pl, br = nr - pr;
      // n*G(parent) - nl*G(left) - nr*G(right) over the common denominator n*nl*nr.
      const i128 num = -i128(b * b + p * p) * nl * nr + i128(bl * bl + pl * pl) * n * nr + i128(br * br + pr * pr) * n * nl;
      const i128 den = i128(n) * nl * nr;
      if (!best || num * best_den > best_num * den) {
        best = Split{static_cast<int>(f), t};
        best_num = num;
        best_den = den;
      }
    }
  }
  return best;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::uint64_t twice = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      twice += scores[i] > scores[j] ? 2 : scores[i] == scores[j] ? 1 : 0;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pairs);
}

double wilcoxon_enumerated_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::size_t total = pooled.size(), n = x.size(), m = y.size();
  // Doubled mid-rank: 2 * (#less) + (#equal) + 1.
  std::vector<std::int64_t> r2(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::int64_t less = 0, equal = 0;
    for (double v : pooled) {
      less += v < pooled[i];
      equal += v == pooled[i];
    }
    r2[i] = 2 * less + equal + 1;
  }
  const std::int64_t nm2 = 2 * static_cast<std::int64_t>(n * m);
  const std::int64_t offset = static_cast<std::int64_t>(n * (n + 1));
  auto u2_of = [&](std::uint32_t mask) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < total; ++i)
      if (mask & (1u << i)) s += r2[i];
    const std::int64_t u = s - offset;
    return std::min(u, nm2 - u);
  };
  const std::uint32_t observed_mask = (1u << n) - 1;
  const std::int64_t observed = u2_of(observed_mask);
  std::uint64_t hits = 0, count = 0;
  for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
    ++count;
    hits += u2_of(mask) <= observed;
  }
  return static_cast<double>(hits) / static_cast<double>(count);
}

double quantile7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

std::vector<std::size_t> tukey_outliers(const std::vector<double>& v, double k) {
  const double q1 = quantile7(v, 0.25), q3 = quantile7(v, 0.75);
  const double lo = q1 - k * (q3 - q1), hi = q3 + k * (q3 - q1);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < lo || v[i] > hi) out.push_back(i);
  return out;
}

namespace {

std::vector<double> draw_row(bool phishing, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto bern = [&](double p) { return u(rng) < p ? 1.0 : 0.0; };
  auto uni = [&](double a, double b) { return std::floor(a + (b - a) * u(rng)); };
  std::vector<double> r(10);
  if (phishing) {
    r[0] = 0;
    r[1] = bern(0.6);
    r[2] = uni(2, 13);
    r[3] = bern(0.6);
    r[4] = r[3] * bern(0.5);
    r[5] = 0;
    r[6] = 0;
    r[7] = r[3] * uni(0, 2000);
    r[8] = r[3] * uni(0, 90);
    r[9] = r[1] == 1 ? 1 : bern(0.2);
  } else {
    r[0] = bern(0.9);
    r[1] = bern(0.9);
    r[2] = uni(0, 3);
    r[3] = 1;
    r[4] = bern(0.9);
    r[5] = bern(0.9);
    r[6] = bern(0.85);
    r[7] = uni(1000, 300000);
    r[8] = uni(60, 1500);
    r[9] = bern(0.95);
  }
  return r;
}

}  // namespace

scout::Dataset synthetic_corpus(std::size_t rows, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  scout::Dataset d;
  for (int i = 1; i <= 10; ++i) d.feature_names.push_back("f" + std::to_string(i));
  for (std::size_t i = 0; i < rows; ++i) {
    const bool phishing = i % 2 == 0;
    auto row = draw_row(phishing, rng);
    if (u(rng) < noise) {
      // Three features taken from the opposite profile; the label stays.
      const auto other = draw_row(!phishing, rng);
      std::vector<int> idx(10);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (int k = 0; k < 3; ++k) row[idx[k]] = other[idx[k]];
    }
    d.x.push_back(row);
    d.y.push_back(phishing ? 1 : 0);
  }
  return d;
}

std::string random_address(std::mt19937_64& rng) {
  static const char* hex = "0123456789abcdef";
  std::string s = "0x";
  for (int i = 0; i < 40; ++i) s += hex[rng() % 16];
  return s;
}

std::string random_hash(std::mt19937_64& rng) {
  static const char* hex = "0123456789abcdef";
  std::string s = "0x";
  for (int i = 0; i < 64; ++i) s += hex[rng() % 16];
  return s;
}

std::vector<scout::ChainTransaction> random_ledger(std::size_t n, const std::vector<std::string>& wallets,
                                                   std::mt19937_64& rng, std::int64_t t0, std::int64_t span) {
  static const char* methods[] = {"", "mint", "Mint Public", "transfer", "claim", "freeMint", "setApprovalForAll"};
  std::vector<scout::ChainTransaction> txs;
  for (std::size_t i = 0; i < n; ++i) {
    scout::ChainTransaction tx;
    tx.hash = random_hash(rng);
    tx.from = random_address(rng);
    tx.to = rng() % 10 < 7 ? wallets[rng() % wallets.size()] : random_address(rng);
    if (rng() % 5 != 0) {
      // Up to ~1.8e23 wei: a 64-bit draw scaled by 10^4 to exercise values beyond 64 bits.
      tx.value_wei = scout::Wei(rng()) * 10000 + scout::Wei(rng() % 10000);
    }
    tx.timestamp = t0 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span));
    const char* m = methods[rng() % 7];
    if (*m) tx.method = m;
    tx.is_error = rng() % 20 == 0;
    txs.push_back(std::move(tx));
  }
  return txs;
}

}  // namespace oracle
