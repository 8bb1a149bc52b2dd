#pragma once

// Reference implementations used only by tests. None of these call into the
// library code they are checked against.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scout/chainlytics.hpp"
#include "scout/classifier.hpp"

namespace oracle {

// Keccak-256 written straight from the sponge definition: lanes as a 5x5
// array, rho offsets and round constants generated rather than tabulated.
std::array<std::uint8_t, 32> keccak256(const std::string& message);

// Mixed-case checksum of a lowercase 40-hex body, using the oracle Keccak.
std::string checksum(const std::string& lower_body);

struct Split {
  int feature = -1;
  double threshold = 0;
};

// Best split of rows `rows` by exhaustive enumeration of every feature and
// every midpoint between consecutive distinct values. Gini decrease is
// compared as an exact rational. Ties: lower feature, then lower threshold.
// nullopt when the rows are pure or no threshold separates them.
std::optional<Split> best_split(const scout::Dataset& data, const std::vector<std::size_t>& rows);

// AUC as the fraction of (positive, negative) pairs ranked correctly, ties 1/2.
double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Two-sided exact rank-sum p-value by enumerating every assignment of the
// pooled sample to groups of sizes |x| and |y|.
double wilcoxon_enumerated_p(const std::vector<double>& x, const std::vector<double>& y);

// Hyndman-Fan type 7 quantile by direct sort and interpolation.
double quantile7(std::vector<double> v, double q);

// Indices outside [Q1 - k*IQR, Q3 + k*IQR].
std::vector<std::size_t> tukey_outliers(const std::vector<double>& v, double k);

// Synthetic labeled feature rows following the ten feature semantics.
// `noise` is the fraction of rows whose features are drawn from the other
// class profile while keeping their label.
scout::Dataset synthetic_corpus(std::size_t rows, double noise, std::uint64_t seed);

std::string random_address(std::mt19937_64& rng);
std::string random_hash(std::mt19937_64& rng);

// Randomized ledger among `wallets` and outside senders/receivers.
std::vector<scout::ChainTransaction> random_ledger(std::size_t n, const std::vector<std::string>& wallets,
                                                   std::mt19937_64& rng, std::int64_t t0, std::int64_t span);

}  // namespace oracle
