#include "scout/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scout/common.hpp"

namespace scout::stats {

namespace {

std::vector<double> sorted_copy(std::span<const double> values) {
  if (values.empty()) throw DataError("statistic of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return v;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

double median(std::span<const double> values) { return median_sorted(sorted_copy(values)); }

double quantile(std::span<const double> values, double q) {
  if (q < 0.0 || q > 1.0) throw DataError("quantile outside [0, 1]");
  return quantile_sorted(sorted_copy(values), q);
}

Quartiles quartiles(std::span<const double> values) {
  const auto v = sorted_copy(values);
  return {v.front(), quantile_sorted(v, 0.25), median_sorted(v), quantile_sorted(v, 0.75), v.back()};
}

Descriptive describe(std::span<const double> values) {
  const auto v = sorted_copy(values);
  Descriptive d;
  d.count = v.size();
  d.total = std::accumulate(v.begin(), v.end(), 0.0);
  d.min = v.front();
  d.max = v.back();
  d.mean = d.total / static_cast<double>(v.size());
  d.median = median_sorted(v);
  return d;
}

IqrSplit iqr_filter(std::span<const double> values, double k) {
  const auto v = sorted_copy(values);
  const double q1 = quantile_sorted(v, 0.25), q3 = quantile_sorted(v, 0.75);
  IqrSplit out;
  out.lower_fence = q1 - k * (q3 - q1);
  out.upper_fence = q3 + k * (q3 - q1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < out.lower_fence || values[i] > out.upper_fence)
      out.excluded.push_back(i);
    else
      out.kept.push_back(i);
  }
  return out;
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> values) {
  const auto v = sorted_copy(values);
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.emplace_back(v[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

}  // namespace scout::stats
