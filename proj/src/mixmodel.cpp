#include "mixpred/mixmodel.hpp"

#include <cmath>
#include <string>

namespace mixpred {

void MixedDataset::validate(bool require_response) const {
  const Eigen::Index n = size();
  if (compositions.rows() != n || curves.count() != n) {
    throw DimensionMismatch("dataset blocks disagree on n: scalar " + std::to_string(n) +
                            ", compositions " + std::to_string(compositions.rows()) + ", curves " +
                            std::to_string(curves.count()));
  }
  if (require_response && response.size() != n) {
    throw DimensionMismatch("response has " + std::to_string(response.size()) + " entries for n = " +
                            std::to_string(n));
  }
  if (!scalar.allFinite()) throw NonFiniteEntry("scalar predictor has non-finite values");
  if (compositions.cols() < 2) throw InvalidDimension("compositions need at least 2 parts");
  for (Eigen::Index i = 0; i < n; ++i) {
    Composition(compositions.row(i).transpose());
  }
}

MixedDataset MixedDataset::subset(const std::vector<Eigen::Index>& rows) const {
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd s(k);
  Eigen::MatrixXd c(k, compositions.cols());
  Eigen::MatrixXd x(k, curves.values.cols());
  Eigen::VectorXd y(has_response() ? k : 0);
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index i = rows[static_cast<std::size_t>(r)];
    s(r) = scalar(i);
    c.row(r) = compositions.row(i);
    x.row(r) = curves.values.row(i);
    if (has_response()) y(r) = response(i);
  }
  return MixedDataset{std::move(s), std::move(c), CurveSet(curves.grid, std::move(x)), std::move(y)};
}

Eigen::VectorXd MixedFit::coefficients() const {
  const Eigen::Index extra = intercept ? 1 : 0;
  Eigen::VectorXd out(extra + 1 + alpha_star.size() + b.size());
  if (intercept) out(0) = *intercept;
  out(extra) = gamma;
  out.segment(extra + 1, alpha_star.size()) = alpha_star;
  out.tail(b.size()) = b;
  return out;
}

namespace {

std::vector<ColumnLabel> make_labels(bool intercept, Eigen::Index ilr_cols, Eigen::Index scores) {
  std::vector<ColumnLabel> labels;
  if (intercept) labels.push_back({Block::Intercept, "intercept"});
  labels.push_back({Block::Scalar, "z"});
  for (Eigen::Index j = 0; j < ilr_cols; ++j) {
    labels.push_back({Block::Ilr, "ilr" + std::to_string(j + 1)});
  }
  for (Eigen::Index j = 0; j < scores; ++j) {
    labels.push_back({Block::Fpca, "score" + std::to_string(j + 1)});
  }
  return labels;
}

}  // namespace

std::vector<ColumnLabel> MixedFit::labels() const {
  return make_labels(intercept.has_value(), alpha_star.size(), b.size());
}

Centers compute_centers(const MixedDataset& data, bool standardize_scalar) {
  if (data.size() < 2) throw InvalidDimension("centering needs at least 2 observations");
  Centers c;
  c.scalar_mean = data.scalar.mean();
  if (standardize_scalar) {
    const double var =
        (data.scalar.array() - c.scalar_mean).square().sum() / static_cast<double>(data.size() - 1);
    if (!(var > 0)) throw ZeroVariance("scalar predictor has zero variance; block [scalar] is not identifiable");
    c.scalar_scale = std::sqrt(var);
  }
  c.ilr_mean = ilr_rows(data.compositions).colwise().mean().transpose();
  return c;
}

DesignMatrix assemble_design(const MixedDataset& data, const FpcaBasis& basis, const Centers& centers,
                             bool include_intercept) {
  data.validate(false);
  if (centers.ilr_mean.size() != data.parts() - 1) {
    throw DimensionMismatch("model expects " + std::to_string(centers.ilr_mean.size() + 1) +
                            "-part compositions, data has " + std::to_string(data.parts()));
  }
  const Eigen::Index n = data.size();
  const Eigen::Index k = data.parts() - 1;
  const Eigen::Index m = basis.order();
  const Eigen::Index off = include_intercept ? 1 : 0;

  DesignMatrix x;
  x.values.resize(n, off + 1 + k + m);
  if (include_intercept) x.values.col(0).setOnes();
  x.values.col(off) = (data.scalar.array() - centers.scalar_mean) / centers.scalar_scale;
  x.values.middleCols(off + 1, k) = ilr_rows(data.compositions).rowwise() - centers.ilr_mean.transpose();
  x.values.rightCols(m) = project_rows(basis, data.curves);
  x.labels = make_labels(include_intercept, k, m);
  return x;
}

DesignMatrix assemble_design(const MixedDataset& data, const FpcaBasis& basis, bool include_intercept) {
  return assemble_design(data, basis, compute_centers(data, false), include_intercept);
}

MixedFit fit(const MixedDataset& data, const MixedFitOptions& options) {
  data.validate(true);
  FpcaBasis basis = fit_fpca(data.curves, options.lambda);
  const Centers centers = compute_centers(data, options.standardize_scalar);
  const DesignMatrix x = assemble_design(data, basis, centers, options.include_intercept);

  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto& label = x.labels[static_cast<std::size_t>(j)];
    if (label.block == Block::Intercept) continue;
    const double mean = x.values.col(j).mean();
    const double sd = std::sqrt((x.values.col(j).array() - mean).square().mean());
    if (!(sd > 1e-12)) {
      throw ZeroVariance("column " + label.name + " has zero variance; block [" +
                         block_name(label.block) + "] is not identifiable");
    }
  }

  LogisticFit glm = fit_logistic(x, data.response, options.glm);
  if (data.size() < 10) glm.warnings.push_back("fewer than 10 observations");

  const Eigen::Index off = options.include_intercept ? 1 : 0;
  const Eigen::Index k = data.parts() - 1;
  const Eigen::Index m = basis.order();
  const Eigen::VectorXd& w = glm.coefficients;
  Eigen::VectorXd alpha_star = w.segment(off + 1, k);
  Eigen::VectorXd b = w.tail(m);
  Composition alpha = ilr_inv(IlrVector(alpha_star), data.parts());
  FunctionalSample beta = reconstruct_curve(basis, b);

  return MixedFit{
      .intercept = options.include_intercept ? std::optional<double>(w(0)) : std::nullopt,
      .gamma = w(off),
      .alpha_star = std::move(alpha_star),
      .alpha = std::move(alpha),
      .b = std::move(b),
      .beta_curve = std::move(beta),
      .basis = std::move(basis),
      .centers = centers,
      .lambda = options.lambda,
      .diagnostics = std::move(glm),
  };
}

Eigen::VectorXd predict(const MixedFit& model, const MixedDataset& data) {
  if (data.parts() != model.parts()) {
    throw DimensionMismatch("model expects " + std::to_string(model.parts()) +
                            "-part compositions, data has " + std::to_string(data.parts()));
  }
  if (!data.curves.grid.matches(model.basis.grid)) {
    throw GridMismatch("curves are not on the model's grid");
  }
  const DesignMatrix x = assemble_design(data, model.basis, model.centers, model.intercept.has_value());
  return predict_proba(model.coefficients(), x);
}

Eigen::VectorXi classify(const Eigen::VectorXd& probabilities, double cut) {
  return (probabilities.array() > cut).cast<int>();
}

}  // namespace mixpred
