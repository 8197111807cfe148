#pragma once

// Compositional-data geometry on the D-part simplex: closure, the
// isometric log-ratio (ilr) transform and its inverse, the orthonormal
// contrast basis, and the Aitchison distance.

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "mixpred/errors.hpp"

namespace mixpred {

namespace simplex_detail {

template <typename Derived>
void require_finite_positive(const Eigen::MatrixBase<Derived>& raw) {
  for (Eigen::Index j = 0; j < raw.size(); ++j) {
    const auto v = raw(j);
    if (!std::isfinite(v)) {
      throw NonFiniteEntry("composition part " + std::to_string(j) + " is not finite");
    }
    if (!(v > 0)) {
      throw NonPositiveEntry("composition part " + std::to_string(j) +
                             " is not strictly positive");
    }
  }
}

}  // namespace simplex_detail

/// A point of the simplex S^D: D >= 2 strictly positive parts summing to one.
template <typename Scalar>
class BasicComposition {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Validates already-closed parts. Use closure() for raw counts.
  explicit BasicComposition(Vector parts) : parts_(std::move(parts)) {
    if (parts_.size() < 2) {
      throw InvalidDimension("a composition needs at least 2 parts");
    }
    simplex_detail::require_finite_positive(parts_);
    if (std::abs(parts_.sum() - Scalar(1)) > Scalar(1e-12)) {
      throw NotClosed("composition parts do not sum to 1");
    }
    if ((parts_.array() >= Scalar(1)).any()) {
      throw NonPositiveEntry("composition part equal to 1 leaves others at zero");
    }
  }

  const Vector& parts() const noexcept { return parts_; }
  Eigen::Index size() const noexcept { return parts_.size(); }
  Scalar operator[](Eigen::Index j) const { return parts_(j); }

 private:
  Vector parts_;
};

/// Coordinates in R^{D-1} produced by the ilr transform.
template <typename Scalar>
class BasicIlrVector {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit BasicIlrVector(Vector coords) : coords_(std::move(coords)) {
    if (!coords_.allFinite()) throw NonFiniteEntry("ilr coordinates must be finite");
  }

  const Vector& coords() const noexcept { return coords_; }
  Eigen::Index size() const noexcept { return coords_.size(); }
  /// Number of parts of the composition these coordinates describe.
  Eigen::Index parts() const noexcept { return coords_.size() + 1; }

 private:
  Vector coords_;
};

/// The (D-1) x D orthonormal, zero-sum-row ilr basis.
template <typename Scalar>
class BasicContrastMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit BasicContrastMatrix(Eigen::Index parts) : psi_(Matrix::Zero(parts - 1, parts)) {
    if (parts < 2) throw InvalidDimension("contrast matrix requires D >= 2");
    const Eigen::Index D = parts;
    // 1-based (i, j) as in the standard sequential binary partition basis.
    for (Eigen::Index i = 1; i < D; ++i) {
      const Scalar k = Scalar(D - i);
      for (Eigen::Index j = 1; j <= D; ++j) {
        Scalar v = 0;
        if (j <= D - i) {
          v = std::sqrt(Scalar(1) / (k * (k + 1)));
        } else if (j == D - i + 1) {
          v = -std::sqrt(k / (k + 1));
        }
        psi_(i - 1, j - 1) = v;
      }
    }
  }

  const Matrix& psi() const noexcept { return psi_; }
  Eigen::Index parts() const noexcept { return psi_.cols(); }

 private:
  Matrix psi_;
};

using Composition = BasicComposition<double>;
using IlrVector = BasicIlrVector<double>;
using ContrastMatrix = BasicContrastMatrix<double>;

template <typename Scalar = double>
BasicContrastMatrix<Scalar> contrast_matrix(Eigen::Index parts) {
  return BasicContrastMatrix<Scalar>(parts);
}

/// Rescales a strictly positive vector so its parts sum to one.
template <typename Derived>
BasicComposition<typename Derived::Scalar> closure(const Eigen::MatrixBase<Derived>& raw) {
  using Scalar = typename Derived::Scalar;
  if (raw.size() < 2) throw InvalidDimension("closure needs at least 2 parts");
  simplex_detail::require_finite_positive(raw);
  const Scalar total = raw.sum();
  if (!std::isfinite(total)) throw Overflow("sum of parts overflows");
  return BasicComposition<Scalar>(raw / total);
}

/// Centered log-ratio: log parts minus their mean (log of the geometric mean).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> clr(const BasicComposition<Scalar>& c) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> logs = c.parts().array().log();
  return logs.array() - logs.mean();
}

template <typename Scalar>
BasicIlrVector<Scalar> ilr(const BasicComposition<Scalar>& c,
                           const BasicContrastMatrix<Scalar>& basis) {
  if (basis.parts() != c.size()) {
    throw DimensionMismatch("contrast matrix has " + std::to_string(basis.parts()) +
                            " parts, composition has " + std::to_string(c.size()));
  }
  return BasicIlrVector<Scalar>(basis.psi() * clr(c));
}

template <typename Scalar>
BasicIlrVector<Scalar> ilr(const BasicComposition<Scalar>& c) {
  return ilr(c, BasicContrastMatrix<Scalar>(c.size()));
}

/// Inverse ilr: closure(exp(v * psi)). Underflow of any part is reported
/// rather than clamped, since the result would leave the open simplex.
template <typename Scalar>
BasicComposition<Scalar> ilr_inv(const BasicIlrVector<Scalar>& v,
                                 const BasicContrastMatrix<Scalar>& basis) {
  if (basis.parts() != v.parts()) {
    throw InvalidDimension("ilr vector of length " + std::to_string(v.size()) +
                           " does not match D = " + std::to_string(basis.parts()));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_parts = basis.psi().transpose() * v.coords();
  log_parts.array() -= log_parts.maxCoeff();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = log_parts.array().exp();
  if ((e.array() <= Scalar(0)).any() || !e.allFinite()) {
    throw Overflow("ilr inverse saturates: a part underflows to zero");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> parts = e / e.sum();
  if ((parts.array() >= Scalar(1)).any()) {
    throw Overflow("ilr inverse saturates: one part absorbs the whole composition");
  }
  return BasicComposition<Scalar>(parts);
}

template <typename Scalar>
BasicComposition<Scalar> ilr_inv(const BasicIlrVector<Scalar>& v, Eigen::Index parts) {
  if (parts != v.parts()) {
    throw InvalidDimension("ilr vector of length " + std::to_string(v.size()) +
                           " does not match D = " + std::to_string(parts));
  }
  return ilr_inv(v, BasicContrastMatrix<Scalar>(parts));
}

template <typename Scalar>
Scalar aitchison_distance(const BasicComposition<Scalar>& a, const BasicComposition<Scalar>& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("compositions have different numbers of parts");
  }
  return (clr(a) - clr(b)).norm();
}

/// Row-wise ilr of an n x D matrix of closed compositions.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> ilr_rows(
    const Eigen::MatrixBase<Derived>& parts) {
  using Scalar = typename Derived::Scalar;
  const BasicContrastMatrix<Scalar> basis(parts.cols());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(parts.rows(), parts.cols() - 1);
  for (Eigen::Index i = 0; i < parts.rows(); ++i) {
    const BasicComposition<Scalar> c(parts.row(i).transpose());
    out.row(i) = ilr(c, basis).coords().transpose();
  }
  return out;
}

}  // namespace mixpred
