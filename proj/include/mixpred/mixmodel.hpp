#pragma once

// Mixed-predictor classification: a scalar, a composition and a curve per
// observation are mapped to plain numeric features (centered scalar, ilr
// coordinates, FPCA scores), stacked into one design matrix, and handed to
// the logistic classifier. Fitted coefficients are mapped back to their
// native spaces (a composition for the ilr block, a curve for the scores).

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mixpred/fpca.hpp"
#include "mixpred/glm.hpp"
#include "mixpred/simplex.hpp"

namespace mixpred {

struct MixedDataset {
  Eigen::VectorXd scalar;        // n
  Eigen::MatrixXd compositions;  // n x D, closed rows
  CurveSet curves;               // n curves on a shared grid
  Eigen::VectorXd response;      // n values in {0, 1}; empty when predicting

  Eigen::Index size() const noexcept { return scalar.size(); }
  Eigen::Index parts() const noexcept { return compositions.cols(); }
  bool has_response() const noexcept { return response.size() > 0; }

  /// Checks block sizes and per-block invariants.
  void validate(bool require_response) const;
  MixedDataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Location/scale constants learned on training data and reused at prediction.
struct Centers {
  double scalar_mean = 0.0;
  double scalar_scale = 1.0;  // 1 when the scalar is only centered
  Eigen::VectorXd ilr_mean;   // D - 1
};

struct MixedFitOptions {
  double lambda = 0.85;
  bool include_intercept = true;
  bool standardize_scalar = true;
  LogisticOptions glm;
};

struct MixedFit {
  std::optional<double> intercept;
  double gamma = 0.0;  // per unit of the (standardized) scalar column
  Eigen::VectorXd alpha_star;
  Composition alpha;
  Eigen::VectorXd b;
  FunctionalSample beta_curve;
  FpcaBasis basis;
  Centers centers;
  double lambda = 0.85;
  LogisticFit diagnostics;

  /// gamma expressed per raw unit of the scalar predictor.
  double gamma_raw() const noexcept { return gamma / centers.scalar_scale; }
  Eigen::Index parts() const noexcept { return alpha.size(); }
  /// Stacked coefficient vector in design-column order.
  Eigen::VectorXd coefficients() const;
  std::vector<ColumnLabel> labels() const;
};

Centers compute_centers(const MixedDataset& data, bool standardize_scalar);

DesignMatrix assemble_design(const MixedDataset& data, const FpcaBasis& basis,
                             const Centers& centers, bool include_intercept);

/// Convenience form that learns the centers from `data` itself.
DesignMatrix assemble_design(const MixedDataset& data, const FpcaBasis& basis,
                             bool include_intercept);

MixedFit fit(const MixedDataset& data, const MixedFitOptions& options = {});

Eigen::VectorXd predict(const MixedFit& model, const MixedDataset& data);

/// 1 where probability > cut, else 0.
Eigen::VectorXi classify(const Eigen::VectorXd& probabilities, double cut = 0.5);

void save_model(const MixedFit& model, std::ostream& out);
MixedFit load_model(std::istream& in);

}  // namespace mixpred
