#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mixpred/fpca.hpp"

using namespace mixpred;

namespace {

constexpr double kPi = std::numbers::pi;

// n curves built from a few cosine modes with decaying variance plus small noise.
CurveSet smooth_panel(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p, int modes = 6,
                      double noise = 1e-3) {
  const Grid grid = Grid::linspace(0, 1, p);
  const Eigen::VectorXd t = grid.points();
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Constant(p, 0.5);
    for (int j = 1; j <= modes; ++j) {
      row += z(rng) / j * std::sqrt(2.0) * (j * kPi * t.array()).cos().matrix();
    }
    for (Eigen::Index k = 0; k < p; ++k) row(k) += noise * z(rng);
    x.row(i) = row.transpose();
  }
  return CurveSet(grid, std::move(x));
}

}  // namespace

TEST_CASE("grid construction and validation") {
  const Grid g = Grid::linspace(0, 1, 100);
  CHECK(g.step() == doctest::Approx(1.0 / 99));
  CHECK(g.at(99) == doctest::Approx(1.0));
  CHECK(Grid::from_points(g.points()).matches(g));
  Eigen::VectorXd uneven(3);
  uneven << 0, 1, 3;
  CHECK_THROWS_AS(Grid::from_points(uneven), InvalidDimension);
  Eigen::VectorXd one(1);
  one << 0;
  CHECK_THROWS_AS(Grid::from_points(one), InvalidDimension);
}

TEST_CASE("quadrature inner product") {
  const Grid g = Grid::linspace(0, 1, 100);
  const Eigen::VectorXd t = g.points();
  const Eigen::VectorXd f = std::sqrt(2.0) * (kPi * t.array()).cos();
  const Eigen::VectorXd h = std::sqrt(2.0) * (2 * kPi * t.array()).cos();
  CHECK(quadrature_inner_product(f, Eigen::VectorXd::Zero(100), g) == 0.0);
  CHECK(std::abs(quadrature_inner_product(f, h, g)) <= 2e-2);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(100);
  CHECK(std::abs(quadrature_inner_product(ones, ones, g) - 1.0) <= 2e-2);
  CHECK_THROWS_AS(quadrature_inner_product(ones, Eigen::VectorXd::Ones(99), g), DimensionMismatch);
}

TEST_CASE("centering") {
  const Grid g = Grid::linspace(0, 1, 10);
  Eigen::MatrixXd same(2, 10);
  same.row(0) = Eigen::RowVectorXd::LinSpaced(10, -1, 3);
  same.row(1) = same.row(0);
  CHECK(center(CurveSet(g, same)).centered.values.cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd sym(2, 10);
  sym.row(0) = Eigen::RowVectorXd::LinSpaced(10, -1, 3);
  sym.row(1) = -sym.row(0);
  const auto c = center(CurveSet(g, sym));
  CHECK(c.mean_curve.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.centered.values == sym);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(5, 10, [&] { return z(rng); });
  CHECK(center(CurveSet(g, r)).centered.values.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(center(CurveSet(g, Eigen::MatrixXd::Zero(1, 10))), InvalidDimension);
  CHECK_THROWS_AS(CurveSet(g, Eigen::MatrixXd::Zero(3, 9)), GridMismatch);
}

TEST_CASE("stacking curves requires a shared grid") {
  const Grid a = Grid::linspace(0, 1, 5);
  const Grid b = Grid::linspace(0, 2, 5);
  std::vector<FunctionalSample> ok{FunctionalSample(a, Eigen::VectorXd::Ones(5)),
                                   FunctionalSample(a, Eigen::VectorXd::Zero(5))};
  CHECK(stack_curves<double>(ok).count() == 2);
  std::vector<FunctionalSample> bad{FunctionalSample(a, Eigen::VectorXd::Ones(5)),
                                    FunctionalSample(b, Eigen::VectorXd::Zero(5))};
  CHECK_THROWS_AS(stack_curves<double>(bad), GridMismatch);
}

TEST_CASE("empirical covariance matches a naive double loop") {
  Eigen::RowVectorXd f = Eigen::RowVectorXd::LinSpaced(4, 1, 4);
  CHECK((empirical_covariance(Eigen::MatrixXd(f)) - f.transpose() * f).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(empirical_covariance(Eigen::MatrixXd::Zero(6, 4)).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0, 1);
  const Eigen::MatrixXd raw = Eigen::MatrixXd::NullaryExpr(50, 20, [&] { return z(rng); });
  const Eigen::MatrixXd x = raw.rowwise() - raw.colwise().mean();
  const Eigen::MatrixXd k = empirical_covariance(x);
  for (Eigen::Index s = 0; s < 20; ++s) {
    for (Eigen::Index t = 0; t < 20; ++t) {
      double acc = 0;
      for (Eigen::Index i = 0; i < 50; ++i) acc += x(i, s) * x(i, t);
      REQUIRE(std::abs(k(s, t) - acc / 50) <= 1e-12);
    }
  }
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncation order selection") {
  Eigen::VectorXd ev(4);
  ev << 5, 3, 1.5, 0.5;
  CHECK(truncation_order(ev, 0.5) == 1);
  CHECK(truncation_order(ev, 0.8) == 2);
  CHECK(truncation_order(ev, 0.85) == 3);
  CHECK(truncation_order(ev, 0.95) == 3);
  CHECK(truncation_order(ev, 1.0) == 4);
  CHECK_THROWS_AS(truncation_order(ev, 0.0), InvalidArgument);
  CHECK_THROWS_AS(truncation_order(ev, 1.5), InvalidArgument);
}

TEST_CASE("rank-one data gives a single component along the data direction") {
  const Grid g = Grid::linspace(0, 1, 30);
  const Eigen::VectorXd dir = (g.points().array() * 3).sin() + 0.2;
  Eigen::MatrixXd x(12, 30);
  for (Eigen::Index i = 0; i < 12; ++i) x.row(i) = (static_cast<double>(i) - 4.5) * dir.transpose();
  for (double lambda : {0.1, 0.85, 0.99, 1.0}) {
    const auto basis = fit_fpca(CurveSet(g, x), lambda);
    REQUIRE(basis.order() == 1);
    const Eigen::VectorXd phi = basis.eigenfunctions.col(0);
    const double cosine = phi.dot(dir) / (phi.norm() * dir.norm());
    CHECK(std::abs(cosine) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("lambda = 1 selects the numerical rank") {
  const Grid g = Grid::linspace(0, 1, 25);
  const Eigen::VectorXd t = g.points();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd x(40, 25);
  for (Eigen::Index i = 0; i < 40; ++i) {
    x.row(i) = (z(rng) * t.array().cos() + z(rng) * t.array().square() + z(rng) * (5 * t.array()).sin())
                   .matrix()
                   .transpose();
  }
  CHECK(fit_fpca(CurveSet(g, x), 1.0).order() == 3);
}

TEST_CASE("identical curves are degenerate") {
  const Grid g = Grid::linspace(0, 1, 10);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 10);
  CHECK_THROWS_AS(fit_fpca(CurveSet(g, x), 0.85), DegenerateData);
}

TEST_CASE("fitted basis properties") {
  std::mt19937_64 rng(21);
  const CurveSet curves = smooth_panel(rng, 200, 60);
  const auto basis = fit_fpca(curves, 0.95);
  const Eigen::Index m = basis.order();
  REQUIRE(m >= 2);

  SUBCASE("orthonormal under the quadrature inner product") {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double ip = quadrature_inner_product(basis.eigenfunctions.col(i), basis.eigenfunctions.col(j),
                                                   basis.grid);
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) <= 1e-8);
      }
    }
  }
  SUBCASE("eigenvalues nonincreasing and nonnegative") {
    for (Eigen::Index j = 1; j < m; ++j) CHECK(basis.eigenvalues(j) <= basis.eigenvalues(j - 1));
    CHECK(basis.eigenvalues.minCoeff() >= 0.0);
  }
  SUBCASE("sign convention: largest-magnitude entry is positive") {
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::Index at = 0;
      basis.eigenfunctions.col(j).cwiseAbs().maxCoeff(&at);
      CHECK(basis.eigenfunctions(at, j) > 0);
    }
  }
  SUBCASE("variance capture on training data") {
    const Eigen::MatrixXd scores = project_rows(basis, curves);
    const Eigen::MatrixXd centered = curves.values.rowwise() - basis.mean_curve.transpose();
    const double total = centered.squaredNorm() * basis.grid.step();
    CHECK(scores.squaredNorm() / total >= basis.lambda);
    // Reconstruction adds back the mean and loses at most 1 - lambda of the energy.
    double residual = 0;
    for (Eigen::Index i = 0; i < curves.count(); ++i) {
      const auto rec = reconstruct_curve(basis, scores.row(i).transpose());
      const Eigen::VectorXd diff = curves.values.row(i).transpose() - basis.mean_curve - rec.values;
      residual += diff.squaredNorm() * basis.grid.step();
    }
    CHECK(residual / total <= 1 - basis.lambda + 1e-12);
  }
}

TEST_CASE("order is monotone in lambda and reconstruction error shrinks with order") {
  std::mt19937_64 rng(33);
  const CurveSet curves = smooth_panel(rng, 150, 40, 8, 1e-2);
  Eigen::Index previous = 0;
  double previous_error = INFINITY;
  for (double lambda = 0.3; lambda <= 1.0 + 1e-12; lambda += 0.05) {
    const auto basis = fit_fpca(curves, std::min(lambda, 1.0));
    CHECK(basis.order() >= previous);
    double error = 0;
    const Eigen::MatrixXd scores = project_rows(basis, curves);
    const Eigen::MatrixXd rec = scores * basis.eigenfunctions.transpose();
    const Eigen::MatrixXd centered = curves.values.rowwise() - basis.mean_curve.transpose();
    error = (centered - rec).squaredNorm() * basis.grid.step();
    CHECK(error <= previous_error + 1e-12);
    previous = basis.order();
    previous_error = error;
  }
}

TEST_CASE("projection and reconstruction") {
  std::mt19937_64 rng(44);
  const CurveSet curves = smooth_panel(rng, 80, 50);
  const auto basis = fit_fpca(curves, 0.9);
  const Eigen::Index m = basis.order();

  const FunctionalSample at_mean(basis.grid, basis.mean_curve);
  CHECK(project(basis, at_mean).cwiseAbs().maxCoeff() <= 1e-12);

  const FunctionalSample shifted(basis.grid, basis.mean_curve + 2 * basis.eigenfunctions.col(0));
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(m);
  expected(0) = 2;
  CHECK((project(basis, shifted) - expected).cwiseAbs().maxCoeff() <= 1e-8);

  CHECK(reconstruct_curve(basis, Eigen::VectorXd::Zero(m)).values.cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(m, j);
    CHECK((reconstruct_curve(basis, e).values - basis.eigenfunctions.col(j)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(reconstruct_curve(basis, Eigen::VectorXd::Zero(m + 1)), DimensionMismatch);

  const FunctionalSample elsewhere(Grid::linspace(0, 2, 50), Eigen::VectorXd::Zero(50));
  CHECK_THROWS_AS(project(basis, elsewhere), GridMismatch);
}
