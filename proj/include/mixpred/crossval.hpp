#pragma once

// k-fold cross-validation of the mixed-predictor classifier and the
// threshold sweep built on it.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mixpred/market.hpp"

namespace mixpred {

struct CvOptions {
  int k = 5;
  double lambda = 0.99;
  std::uint64_t seed = 1;
  bool include_intercept = true;
  // Penalty used to refit a fold whose training split is separated.
  double fallback_ridge = 1e-4;
  // Called with each fold's model before it predicts the held-out rows.
  std::function<void(int fold, const MixedFit& model)> on_fold;
};

struct CvReport {
  int k = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double tau = 0;
  std::vector<double> fold_accuracy;
  std::vector<std::size_t> fold_size;
  std::vector<bool> fold_ridge;  // fold refit with the ridge fallback
  double mean_accuracy = 0;

  bool any_ridge() const;
};

/// Random permutation of 0..n-1 from the seed. Uses only the raw engine
/// output, so the order is the same on every standard library.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

/// Fold index of every observation: permute, then cut into contiguous blocks
/// whose sizes differ by at most one (larger blocks first).
std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed);

/// Requires n >= 4k (EmptySubsample otherwise). Every fold refits the basis,
/// centers and classifier on its training split only.
CvReport cross_validate(const MixedDataset& data, const CvOptions& options = {});
CvReport cross_validate(const std::vector<MarketRecord>& records, const CvOptions& options = {});

struct SweepRow {
  double tau = 0;
  std::size_t n_kept = 0;
  std::optional<double> mean_accuracy;
  std::string flags;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> best;  // index of the highest accuracy (first on ties)
};

/// 0, step, 2 step, ... up to tau_max inclusive.
std::vector<double> tau_grid(double tau_max = 0.01, double step = 0.0005);

SweepResult tau_sweep(const std::vector<MarketRecord>& records, const std::vector<double>& taus,
                      const CvOptions& options = {});

void write_sweep_csv(const SweepResult& sweep, std::ostream& out);
void write_cv_report(const CvReport& report, std::ostream& out);

}  // namespace mixpred
