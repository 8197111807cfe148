#pragma once

// Monte-Carlo validation of the mixed-predictor estimator. Data come from a
// known model with a scalar, a 3-part composition and a curve built from a
// cosine series; each replicate is refit and scored against the truth.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mixpred/mixmodel.hpp"

namespace mixpred {

struct SimConfig {
  Eigen::Index n = 100;
  double sigma = 0.2;
  int replicates = 200;
  Eigen::Index grid_size = 100;  // T
  int terms = 50;                // J
  double decay = 1.1;            // a
  double lambda = 0.85;
  std::uint64_t seed = 20190101;

  void validate() const;
};

struct SimTruth {
  double gamma = 1.0;
  Eigen::Vector3d alpha{0.3, 0.5, 0.2};
  FunctionalSample beta;
};

struct SimData {
  MixedDataset data;
  SimTruth truth;
};

/// Independent 64-bit stream for one replicate of one study.
std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t replicate_index);

/// Coefficient curve sum_j beta_j sqrt(2) cos(j pi t) with beta_1 = 0.3 and
/// beta_j = 4 (-1)^{j+1} j^{-2}.
FunctionalSample true_beta(const Grid& grid, int terms);

SimData generate(const SimConfig& config, std::uint64_t replicate_index);

/// Integrated squared difference of two curves on a shared grid.
double mise(const FunctionalSample& estimate, const FunctionalSample& truth);

/// Pearson correlation of curve values over the grid points.
double curve_correlation(const FunctionalSample& estimate, const FunctionalSample& truth);

struct ReplicateResult {
  bool ok = false;
  std::string failure;
  double correlation = 0;
  double mise = 0;
  double gamma_bias = 0;
  Eigen::Vector3d alpha_bias = Eigen::Vector3d::Zero();
  Eigen::Index order = 0;
};

ReplicateResult run_replicate(const SimConfig& config, std::uint64_t replicate_index);

struct MeanSd {
  double mean = 0;
  double sd = 0;
};

struct SimReport {
  SimConfig config;
  int succeeded = 0;
  int failed = 0;
  MeanSd correlation;
  MeanSd mise;
  MeanSd gamma_bias;
  MeanSd alpha_bias[3];
  double mean_order = 0;
};

/// Aggregates replicate results in index order; failed replicates are
/// excluded and counted. Throws StudyFailure when 5% or more fail.
SimReport summarize(const SimConfig& config, const std::vector<ReplicateResult>& results);

/// Runs every config, spreading replicates over `threads` workers. The
/// reduction is ordered by replicate index, so output does not depend on
/// the thread count.
std::vector<SimReport> run_study(const std::vector<SimConfig>& configs, unsigned threads = 1);

void write_report_csv(const std::vector<SimReport>& reports, std::ostream& out);

/// Aligned text tables: sigma rows by sample-size columns, one table per metric.
void write_report_tables(const std::vector<SimReport>& reports, std::ostream& out);

}  // namespace mixpred
