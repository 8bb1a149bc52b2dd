#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

// Descriptive statistics shared by every analytics module so that "median"
// means the same thing everywhere.
namespace scout::stats {

// Middle element for odd n, mean of the two middle elements for even n.
// Throws DataError on an empty sample.
double median(std::span<const double> values);

// Linear interpolation between order statistics at h = (n - 1) * q
// (Hyndman-Fan type 7). q in [0, 1].
double quantile(std::span<const double> values, double q);

struct Quartiles {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
Quartiles quartiles(std::span<const double> values);

struct Descriptive {
  std::size_t count = 0;
  double total = 0, min = 0, max = 0, mean = 0, median = 0;
};
Descriptive describe(std::span<const double> values);

// Tukey fences: keeps x with Q1 - k*IQR <= x <= Q3 + k*IQR.
struct IqrSplit {
  std::vector<std::size_t> kept;      // indices into the input, ascending
  std::vector<std::size_t> excluded;  // indices into the input, ascending
  double lower_fence = 0, upper_fence = 0;
};
IqrSplit iqr_filter(std::span<const double> values, double k = 1.5);

// Empirical CDF as (value, fraction of sample <= value) at each distinct value.
std::vector<std::pair<double, double>> ecdf(std::span<const double> values);

}  // namespace scout::stats
