#pragma once

// Functional principal component analysis for curves sampled on a shared,
// equally spaced grid. Integrals are discretized with the rectangle rule,
// so the continuous eigenproblem becomes a symmetric eigendecomposition of
// the covariance matrix scaled by the grid spacing.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mixpred/errors.hpp"

namespace mixpred {

/// Equally spaced, strictly increasing sampling grid.
template <typename Scalar>
class BasicGrid {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicGrid() = default;

  BasicGrid(Scalar start, Scalar step, Eigen::Index size) : start_(start), step_(step), size_(size) {
    if (size < 2) throw InvalidDimension("a grid needs at least 2 points");
    if (!(step > 0) || !std::isfinite(step) || !std::isfinite(start)) {
      throw InvalidDimension("grid spacing must be positive and finite");
    }
  }

  /// p points from a to b inclusive.
  static BasicGrid linspace(Scalar a, Scalar b, Eigen::Index size) {
    if (size < 2) throw InvalidDimension("a grid needs at least 2 points");
    return BasicGrid(a, (b - a) / Scalar(size - 1), size);
  }

  /// Validates explicit time points: strictly increasing with constant spacing
  /// (relative tolerance 1e-9).
  static BasicGrid from_points(const Vector& t) {
    if (t.size() < 2) throw InvalidDimension("a grid needs at least 2 points");
    if (!t.allFinite()) throw NonFiniteEntry("grid points must be finite");
    const Scalar step = (t(t.size() - 1) - t(0)) / Scalar(t.size() - 1);
    if (!(step > 0)) throw InvalidDimension("grid must be strictly increasing");
    for (Eigen::Index k = 1; k < t.size(); ++k) {
      const Scalar d = t(k) - t(k - 1);
      if (!(d > 0) || std::abs(d - step) > Scalar(1e-9) * step) {
        throw InvalidDimension("grid is not equally spaced at point " + std::to_string(k));
      }
    }
    return BasicGrid(t(0), step, t.size());
  }

  Scalar start() const noexcept { return start_; }
  Scalar step() const noexcept { return step_; }
  Eigen::Index size() const noexcept { return size_; }
  Scalar at(Eigen::Index k) const noexcept { return start_ + step_ * Scalar(k); }
  Vector points() const { return Vector::LinSpaced(size_, start_, at(size_ - 1)); }

  bool matches(const BasicGrid& other) const noexcept {
    const Scalar tol = Scalar(1e-9) * step_;
    return size_ == other.size_ && std::abs(start_ - other.start_) <= tol &&
           std::abs(step_ - other.step_) <= tol;
  }

 private:
  Scalar start_ = 0;
  Scalar step_ = 1;
  Eigen::Index size_ = 0;
};

/// One curve sampled on a grid.
template <typename Scalar>
struct BasicFunctionalSample {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicFunctionalSample() = default;
  BasicFunctionalSample(BasicGrid<Scalar> g, Vector v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) {
      throw DimensionMismatch("curve has " + std::to_string(values.size()) +
                              " values for a grid of " + std::to_string(grid.size()));
    }
    if (!values.allFinite()) throw NonFiniteEntry("curve values must be finite");
  }

  BasicGrid<Scalar> grid;
  Vector values;
};

/// n curves on a shared grid, one curve per row.
template <typename Scalar>
struct BasicCurveSet {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BasicCurveSet() = default;
  BasicCurveSet(BasicGrid<Scalar> g, Matrix v) : grid(g), values(std::move(v)) {
    if (values.cols() != grid.size()) {
      throw GridMismatch("curve panel has " + std::to_string(values.cols()) +
                         " columns for a grid of " + std::to_string(grid.size()));
    }
    if (!values.allFinite()) throw NonFiniteEntry("curve values must be finite");
  }

  Eigen::Index count() const noexcept { return values.rows(); }
  BasicFunctionalSample<Scalar> sample(Eigen::Index i) const {
    return BasicFunctionalSample<Scalar>(grid, values.row(i).transpose());
  }

  BasicGrid<Scalar> grid;
  Matrix values;
};

/// Fitted eigen-system truncated at `order` components.
template <typename Scalar>
struct BasicFpcaBasis {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BasicGrid<Scalar> grid;
  Vector mean_curve;
  Vector eigenvalues;     // leading `order` values, nonincreasing
  Matrix eigenfunctions;  // p x order, unit quadrature norm
  Scalar total_variance = 0;
  Scalar lambda = 1;

  Eigen::Index order() const noexcept { return eigenvalues.size(); }
};

using Grid = BasicGrid<double>;
using FunctionalSample = BasicFunctionalSample<double>;
using CurveSet = BasicCurveSet<double>;
using FpcaBasis = BasicFpcaBasis<double>;

template <typename Scalar>
BasicCurveSet<Scalar> stack_curves(std::span<const BasicFunctionalSample<Scalar>> samples) {
  if (samples.empty()) throw InvalidDimension("no curves to stack");
  const auto& grid = samples.front().grid;
  typename BasicCurveSet<Scalar>::Matrix m(static_cast<Eigen::Index>(samples.size()), grid.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].grid.matches(grid)) {
      throw GridMismatch("curve " + std::to_string(i) + " is on a different grid");
    }
    m.row(static_cast<Eigen::Index>(i)) = samples[i].values.transpose();
  }
  return BasicCurveSet<Scalar>(grid, std::move(m));
}

/// Rectangle-rule approximation of the integral of f*g over the grid.
template <typename DerivedF, typename DerivedG, typename Scalar>
Scalar quadrature_inner_product(const Eigen::MatrixBase<DerivedF>& f,
                                const Eigen::MatrixBase<DerivedG>& g,
                                const BasicGrid<Scalar>& grid) {
  if (f.size() != grid.size() || g.size() != grid.size()) {
    throw DimensionMismatch("curves and grid differ in length");
  }
  return f.cwiseProduct(g).sum() * grid.step();
}

template <typename Scalar>
Scalar quadrature_inner_product(const BasicFunctionalSample<Scalar>& f,
                                const BasicFunctionalSample<Scalar>& g) {
  if (!f.grid.matches(g.grid)) throw GridMismatch("curves live on different grids");
  return quadrature_inner_product(f.values, g.values, f.grid);
}

template <typename Scalar>
struct BasicCentered {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean_curve;
  BasicCurveSet<Scalar> centered;
};

/// Subtracts the pointwise mean curve from every sample.
template <typename Scalar>
BasicCentered<Scalar> center(const BasicCurveSet<Scalar>& curves) {
  if (curves.count() < 2) throw InvalidDimension("centering needs at least 2 curves");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean = curves.values.colwise().mean().transpose();
  typename BasicCurveSet<Scalar>::Matrix c = curves.values.rowwise() - mean.transpose();
  return {std::move(mean), BasicCurveSet<Scalar>(curves.grid, std::move(c))};
}

/// (1/n) X'X for centered curves stored as rows of X.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> empirical_covariance(
    const Eigen::MatrixBase<Derived>& centered) {
  using Scalar = typename Derived::Scalar;
  if (centered.rows() < 1) throw InvalidDimension("covariance needs at least one curve");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k(centered.cols(), centered.cols());
  k.setZero();
  k.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  k.template triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k / Scalar(centered.rows());
}

/// Smallest m whose leading eigenvalues capture at least `lambda` of the
/// total. `eigenvalues` must be sorted nonincreasing and nonnegative.
template <typename Derived>
Eigen::Index truncation_order(const Eigen::MatrixBase<Derived>& eigenvalues,
                              typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  if (!(lambda > 0) || lambda > 1) throw InvalidArgument("lambda must lie in (0, 1]");
  const Scalar total = eigenvalues.sum();
  if (!(total > 0)) throw DegenerateData("no positive eigenvalues");
  Scalar running = 0;
  for (Eigen::Index m = 0; m < eigenvalues.size(); ++m) {
    running += eigenvalues(m);
    if (running / total >= lambda - Scalar(1e-12)) return m + 1;
  }
  return eigenvalues.size();
}

template <typename Scalar>
BasicFpcaBasis<Scalar> fit_fpca(const BasicCurveSet<Scalar>& curves, Scalar lambda) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!(lambda > 0) || lambda > 1) throw InvalidArgument("lambda must lie in (0, 1]");
  if (curves.count() < 2) throw InvalidDimension("FPCA needs at least 2 curves");

  auto [mean, centered] = center(curves);
  const Scalar dt = curves.grid.step();
  const Matrix weighted = empirical_covariance(centered.values) * dt;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(weighted);
  if (solver.info() != Eigen::Success) throw DegenerateData("eigendecomposition failed");
  // Ascending from the solver; flip to nonincreasing.
  Vector values = solver.eigenvalues().reverse();
  Matrix vectors = solver.eigenvectors().rowwise().reverse();

  values = values.cwiseMax(Scalar(0));
  if (values(0) <= Scalar(1e-12)) throw DegenerateData("all covariance eigenvalues vanish");
  const Scalar floor = Scalar(1e-12) * values(0);
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (values(j) < floor) values(j) = 0;
  }

  const Eigen::Index m = truncation_order(values, lambda);

  BasicFpcaBasis<Scalar> basis;
  basis.grid = curves.grid;
  basis.mean_curve = std::move(mean);
  basis.total_variance = values.sum();
  basis.lambda = lambda;
  basis.eigenvalues = values.head(m);
  basis.eigenfunctions = vectors.leftCols(m) / std::sqrt(dt);
  for (Eigen::Index j = 0; j < m; ++j) {
    auto col = basis.eigenfunctions.col(j);
    Eigen::Index at = 0;
    col.cwiseAbs().maxCoeff(&at);
    if (col(at) < 0) col = -col;
  }
  return basis;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project(const BasicFpcaBasis<Scalar>& basis,
                                                 const BasicFunctionalSample<Scalar>& sample) {
  if (!sample.grid.matches(basis.grid)) throw GridMismatch("sample grid differs from basis grid");
  return basis.eigenfunctions.transpose() * (sample.values - basis.mean_curve) * basis.grid.step();
}

/// Scores of every curve in the panel, one row per curve.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> project_rows(
    const BasicFpcaBasis<Scalar>& basis, const BasicCurveSet<Scalar>& curves) {
  if (!curves.grid.matches(basis.grid)) throw GridMismatch("panel grid differs from basis grid");
  return ((curves.values.rowwise() - basis.mean_curve.transpose()) * basis.eigenfunctions) *
         basis.grid.step();
}

/// Sum_j coefs_j * phi_j on the basis grid; the mean curve is not added.
template <typename Scalar, typename Derived>
BasicFunctionalSample<Scalar> reconstruct_curve(const BasicFpcaBasis<Scalar>& basis,
                                                const Eigen::MatrixBase<Derived>& coefs) {
  if (coefs.size() != basis.order()) {
    throw DimensionMismatch("expected " + std::to_string(basis.order()) + " coefficients, got " +
                            std::to_string(coefs.size()));
  }
  return BasicFunctionalSample<Scalar>(basis.grid, basis.eigenfunctions * coefs);
}

}  // namespace mixpred
