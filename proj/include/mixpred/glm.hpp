#pragma once

// Binary logistic regression by Newton-Raphson with step halving.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mixpred/errors.hpp"

namespace mixpred {

enum class Block { Intercept, Scalar, Ilr, Fpca };

inline const char* block_name(Block b) {
  switch (b) {
    case Block::Intercept: return "intercept";
    case Block::Scalar: return "scalar";
    case Block::Ilr: return "ilr-coordinate";
    case Block::Fpca: return "fpca-score";
  }
  return "?";
}

struct ColumnLabel {
  Block block;
  std::string name;
};

template <typename Scalar>
struct BasicDesignMatrix {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix values;
  std::vector<ColumnLabel> labels;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }

  /// Column indices belonging to one block, in order.
  std::vector<Eigen::Index> columns_of(Block b) const {
    std::vector<Eigen::Index> out;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j].block == b) out.push_back(static_cast<Eigen::Index>(j));
    }
    return out;
  }
};

using DesignMatrix = BasicDesignMatrix<double>;

struct LogisticOptions {
  int max_iter = 100;
  double tol = 1e-8;
  // L2 penalty on every non-intercept coefficient; 0 gives the plain MLE.
  double ridge = 0.0;
  // Divergence threshold on |coefficient| * rms(column).
  double separation_bound = 1e3;
  int max_halvings = 20;
};

template <typename Scalar>
struct BasicLogisticFit {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coefficients;
  bool converged = false;
  int iterations = 0;
  Scalar final_loglik = 0;
  Scalar gradient_norm = 0;  // max-norm of the objective gradient
  Scalar ridge = 0;
  std::vector<Scalar> loglik_trace;  // objective after each accepted iterate
  std::vector<std::string> warnings;
};

using LogisticFit = BasicLogisticFit<double>;

/// log(1 + exp(eta)) without overflow.
template <typename Scalar>
Scalar log1pexp(Scalar eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

/// exp(eta) / (1 + exp(eta)) without overflow.
template <typename Scalar>
Scalar logistic(Scalar eta) {
  if (eta >= 0) return Scalar(1) / (Scalar(1) + std::exp(-eta));
  const Scalar e = std::exp(eta);
  return e / (Scalar(1) + e);
}

namespace glm_detail {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
Vector<Scalar> penalty_mask(const BasicDesignMatrix<Scalar>& x) {
  Vector<Scalar> mask = Vector<Scalar>::Ones(x.cols());
  for (std::size_t j = 0; j < x.labels.size(); ++j) {
    if (x.labels[j].block == Block::Intercept) mask(static_cast<Eigen::Index>(j)) = 0;
  }
  return mask;
}

template <typename Scalar, typename DerivedX, typename DerivedY, typename DerivedW>
Scalar objective(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                 const Eigen::MatrixBase<DerivedW>& w, const Vector<Scalar>& mask, Scalar ridge) {
  const Vector<Scalar> eta = x * w;
  Scalar ll = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - log1pexp(eta(i));
  if (ridge > 0) ll -= Scalar(0.5) * ridge * (w.cwiseProduct(mask)).squaredNorm();
  return ll;
}

// Change in the objective when the coefficients move from w to w + s, summed
// per observation so that gains far below the objective's rounding level are
// still resolved. eta and p are the linear predictor and probabilities at w.
template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar objective_change(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                        const Vector<Scalar>& eta, const Vector<Scalar>& p, const Vector<Scalar>& w,
                        const Vector<Scalar>& s, const Vector<Scalar>& mask, Scalar ridge) {
  const Vector<Scalar> d = x * s;
  Scalar change = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    // log(1 + exp(eta + d)) - log(1 + exp(eta)) = log1p(p * expm1(d)), safe for |d| <= 1.
    const Scalar link = std::abs(d(i)) <= Scalar(1) ? std::log1p(p(i) * std::expm1(d(i)))
                                                    : log1pexp(eta(i) + d(i)) - log1pexp(eta(i));
    change += y(i) * d(i) - link;
  }
  if (ridge > 0) {
    const Vector<Scalar> ms = s.cwiseProduct(mask);
    change -= ridge * (w.dot(ms) + Scalar(0.5) * ms.squaredNorm());
  }
  return change;
}

template <typename Scalar>
void validate(const BasicDesignMatrix<Scalar>& x, const Vector<Scalar>& y) {
  if (x.rows() != y.size()) {
    throw DimensionMismatch("design has " + std::to_string(x.rows()) + " rows, response has " +
                            std::to_string(y.size()));
  }
  if (!x.labels.empty() && static_cast<Eigen::Index>(x.labels.size()) != x.cols()) {
    throw DimensionMismatch("design labels do not match column count");
  }
  if (!x.values.allFinite()) throw NonFiniteEntry("design matrix has non-finite entries");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != Scalar(0) && y(i) != Scalar(1)) {
      throw InvalidArgument("response entry " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

template <typename Scalar>
std::string describe_columns(const BasicDesignMatrix<Scalar>& x, const std::vector<Eigen::Index>& cols) {
  std::string out;
  for (auto j : cols) {
    if (!out.empty()) out += ", ";
    if (static_cast<std::size_t>(j) < x.labels.size()) {
      out += x.labels[j].name + " [" + block_name(x.labels[j].block) + "]";
    } else {
      out += "column " + std::to_string(j);
    }
  }
  return out;
}

}  // namespace glm_detail

/// Log-likelihood sum y*eta - log(1 + exp(eta)) at the given coefficients.
template <typename Scalar>
Scalar log_likelihood(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& coefficients,
                      const BasicDesignMatrix<Scalar>& x,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  if (coefficients.size() != x.cols()) throw DimensionMismatch("coefficient count differs from design");
  glm_detail::validate(x, y);
  const glm_detail::Vector<Scalar> mask = glm_detail::Vector<Scalar>::Zero(x.cols());
  return glm_detail::objective(x.values, y, coefficients, mask, Scalar(0));
}

template <typename Scalar>
Scalar log_likelihood(const BasicLogisticFit<Scalar>& fit, const BasicDesignMatrix<Scalar>& x,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  return log_likelihood(fit.coefficients, x, y);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> predict_proba(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& coefficients, const BasicDesignMatrix<Scalar>& x) {
  if (coefficients.size() != x.cols()) {
    throw DimensionMismatch("design has " + std::to_string(x.cols()) + " columns, fit has " +
                            std::to_string(coefficients.size()));
  }
  return (x.values * coefficients).unaryExpr([](Scalar eta) { return logistic(eta); });
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> predict_proba(const BasicLogisticFit<Scalar>& fit,
                                                       const BasicDesignMatrix<Scalar>& x) {
  return predict_proba(fit.coefficients, x);
}

template <typename Scalar>
BasicLogisticFit<Scalar> fit_logistic(const BasicDesignMatrix<Scalar>& x,
                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                                      const LogisticOptions& opt = {}) {
  using Vector = glm_detail::Vector<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  glm_detail::validate(x, y);
  if (opt.ridge < 0) throw InvalidArgument("ridge must be nonnegative");

  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  const Scalar positives = y.sum();
  if (positives == 0 || positives == Scalar(n)) {
    throw DegenerateResponse("response is constant; the maximum-likelihood estimate does not exist");
  }

  BasicLogisticFit<Scalar> fit;
  fit.ridge = Scalar(opt.ridge);
  if (n <= q) {
    fit.warnings.push_back("design has " + std::to_string(n) + " rows for " + std::to_string(q) +
                           " columns");
  }

  const Vector mask = glm_detail::penalty_mask(x);
  const Scalar ridge = Scalar(opt.ridge);
  Vector column_rms(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    column_rms(j) = std::sqrt(x.values.col(j).squaredNorm() / Scalar(n));
    if (column_rms(j) == 0) {
      throw SingularHessian("design column " + glm_detail::describe_columns(x, {j}) + " is all zero");
    }
  }

  Vector w = Vector::Zero(q);
  Scalar ll = glm_detail::objective(x.values, y, w, mask, ridge);
  fit.loglik_trace.push_back(ll);

  Vector grad(q);
  Vector eta;
  auto gradient_at = [&](const Vector& coef, Vector& p) {
    eta = x.values * coef;
    p = eta.unaryExpr([](Scalar e) { return logistic(e); });
    grad = x.values.transpose() * (y - p) - ridge * mask.cwiseProduct(coef);
  };

  Vector p;
  auto max_abs_eta = [&](const Vector& coef) { return (x.values * coef).cwiseAbs().maxCoeff(); };
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    gradient_at(w, p);

    const Vector weights = p.cwiseProduct(Vector::Ones(n) - p);
    Matrix hess = x.values.transpose() * weights.asDiagonal() * x.values;
    hess.diagonal() += ridge * mask;

    // Equilibrate before judging conditioning so column scale does not matter.
    const Vector d = hess.diagonal().cwiseSqrt();
    Scalar rcond = 0;
    if ((d.array() > Scalar(0)).all()) {
      const Vector dinv = d.cwiseInverse();
      const Matrix scaled = dinv.asDiagonal() * hess * dinv.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Matrix> spectrum(scaled, Eigen::EigenvaluesOnly);
      rcond = spectrum.eigenvalues()(0) / spectrum.eigenvalues()(q - 1);
    }
    if (!(rcond > Scalar(1e-13))) {
      // Saturated fitted probabilities zero out the weights: a separation symptom.
      if (ridge == 0 && max_abs_eta(w) > Scalar(30)) {
        throw SeparationDetected("fitted probabilities saturate at 0 or 1 (quasi-complete separation)");
      }
      throw SingularHessian("weighted normal matrix is numerically singular (reciprocal condition " +
                            std::to_string(rcond) + ")");
    }
    const Vector dinv = d.cwiseInverse();
    Eigen::LDLT<Matrix> ldlt(dinv.asDiagonal() * hess * dinv.asDiagonal());
    const Vector step = dinv.asDiagonal() * ldlt.solve(dinv.asDiagonal() * grad);
    const Scalar scaled_step = step.cwiseProduct(column_rms).cwiseAbs().maxCoeff();

    if (grad.cwiseAbs().maxCoeff() <= Scalar(opt.tol)) {
      // A vanishing gradient with a Newton step that does not shrink means the
      // likelihood keeps rising along a ray: the MLE does not exist.
      if (ridge == 0 && scaled_step > Scalar(1e-2)) {
        throw SeparationDetected("log-likelihood has no finite maximizer (quasi-complete separation)");
      }
      // One more full step lands at working precision, so the result does not
      // depend on where the iteration happened to cross the tolerance.
      const Scalar gain = glm_detail::objective_change(x.values, y, eta, p, w, step, mask, ridge);
      if (std::isfinite(gain) && gain >= 0) {
        w += step;
        ll += gain;
        fit.loglik_trace.push_back(ll);
        ++fit.iterations;
      }
      fit.converged = true;
      break;
    }

    Scalar t = 1;
    bool accepted = false;
    Scalar gain = 0;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      gain = glm_detail::objective_change(x.values, y, eta, p, w, Vector(t * step), mask, ridge);
      if (std::isfinite(gain) && gain >= 0) {
        accepted = true;
        break;
      }
      t *= Scalar(0.5);
    }
    ++fit.iterations;
    if (!accepted) {
      // No ascent direction left at working precision.
      gradient_at(w, p);
      fit.converged = grad.cwiseAbs().maxCoeff() <= Scalar(1e-6);
      break;
    }

    w += t * step;
    ll += gain;
    fit.loglik_trace.push_back(ll);

    if (ridge == 0) {
      std::vector<Eigen::Index> runaway;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (std::abs(w(j)) * column_rms(j) > Scalar(opt.separation_bound)) runaway.push_back(j);
      }
      if (!runaway.empty()) {
        throw SeparationDetected("coefficients diverge (quasi-complete separation) in " +
                                 glm_detail::describe_columns(x, runaway));
      }
    }

    // A negligible step ends the iteration only once the gradient agrees;
    // otherwise the next pass takes the final full step.
    if ((t * step).norm() <= Scalar(opt.tol) * (Scalar(1) + w.norm())) {
      gradient_at(w, p);
      if (grad.cwiseAbs().maxCoeff() <= Scalar(opt.tol)) {
        fit.converged = true;
        break;
      }
    }
  }

  gradient_at(w, p);
  fit.coefficients = w;
  fit.final_loglik = ll;
  fit.gradient_norm = grad.cwiseAbs().maxCoeff();
  if (fit.converged && fit.gradient_norm > Scalar(1e-6)) fit.converged = false;
  return fit;
}

}  // namespace mixpred
