#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "mixpred/glm.hpp"

using namespace mixpred;

namespace {

struct Problem {
  DesignMatrix x;
  Eigen::VectorXd y;
};

Problem simulate_logistic(std::mt19937_64& rng, Eigen::Index n, const Eigen::VectorXd& truth,
                          bool intercept) {
  std::normal_distribution<double> z(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  const Eigen::Index q = truth.size();
  Problem p;
  p.x.values.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) p.x.values(i, j) = (intercept && j == 0) ? 1.0 : z(rng);
  }
  for (Eigen::Index j = 0; j < q; ++j) {
    p.x.labels.push_back({intercept && j == 0 ? Block::Intercept : Block::Scalar, "x" + std::to_string(j)});
  }
  p.y.resize(n);
  const Eigen::VectorXd eta = p.x.values * truth;
  for (Eigen::Index i = 0; i < n; ++i) p.y(i) = u(rng) < 1 / (1 + std::exp(-eta(i))) ? 1 : 0;
  return p;
}

// Independent maximizer: exhaustive search of the log-likelihood on a lattice
// centred at `centre` with `steps` points either side per coordinate.
Eigen::VectorXd grid_search(const Problem& p, const Eigen::VectorXd& centre, double step, int steps) {
  const Eigen::Index q = centre.size();
  std::vector<int> idx(static_cast<std::size_t>(q), -steps);
  Eigen::VectorXd best = centre;
  double best_ll = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd w(q);
  while (true) {
    for (Eigen::Index j = 0; j < q; ++j) w(j) = centre(j) + step * idx[static_cast<std::size_t>(j)];
    double ll = 0;
    for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
      const double eta = p.x.values.row(i).dot(w);
      // Bernoulli product form, evaluated in log space without the log1pexp helper.
      const double pi = 1 / (1 + std::exp(-eta));
      ll += p.y(i) > 0 ? std::log(pi) : std::log1p(-pi);
    }
    if (ll > best_ll) {
      best_ll = ll;
      best = w;
    }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] > steps) idx[k++] = -steps;
    if (k == idx.size()) break;
  }
  return best;
}

}  // namespace

TEST_CASE("stable link and log1pexp") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(40.0) <= 1.0);  // 1 - 4e-18 rounds to 1 in double
  CHECK(logistic(40.0) > 1 - 1e-15);
  CHECK(logistic(-40.0) > 0.0);
  CHECK(logistic(-40.0) < 1e-15);
  CHECK(std::isfinite(logistic(-1000.0)));
  CHECK(log1pexp(1000.0) == 1000.0);
  CHECK(log1pexp(-1000.0) == 0.0);
  CHECK(log1pexp(0.0) == doctest::Approx(std::log(2.0)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0, 5);
  for (int i = 0; i < 1000; ++i) {
    const double eta = z(rng);
    REQUIRE(logistic(eta) + logistic(-eta) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("constant response has no MLE") {
  DesignMatrix x{Eigen::MatrixXd::Ones(5, 1), {{Block::Intercept, "intercept"}}};
  CHECK_THROWS_AS(fit_logistic(x, Eigen::VectorXd(Eigen::VectorXd::Zero(5))), DegenerateResponse);
  CHECK_THROWS_AS(fit_logistic(x, Eigen::VectorXd(Eigen::VectorXd::Ones(5))), DegenerateResponse);
}

TEST_CASE("perfect separation is detected") {
  DesignMatrix x{Eigen::MatrixXd(2, 1), {{Block::Scalar, "z"}}};
  x.values << -1, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  CHECK_THROWS_AS(fit_logistic(x, y), SeparationDetected);

  // A tiny ridge turns the problem into a penalized MLE with a finite optimum.
  LogisticOptions opt;
  opt.ridge = 1e-4;
  opt.max_iter = 500;
  const auto fit = fit_logistic(x, y, opt);
  CHECK(std::isfinite(fit.coefficients(0)));
  CHECK(fit.coefficients(0) > 5);
  CHECK(fit.ridge == 1e-4);
}

TEST_CASE("separation on a larger design names the offending column") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0, 1);
  DesignMatrix x{Eigen::MatrixXd(40, 3), {{Block::Intercept, "intercept"}, {Block::Scalar, "z"}, {Block::Ilr, "ilr1"}}};
  Eigen::VectorXd y(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    x.values(i, 0) = 1;
    x.values(i, 1) = z(rng);
    x.values(i, 2) = z(rng);
    y(i) = x.values(i, 2) > 0 ? 1 : 0;
  }
  CHECK_THROWS_AS(fit_logistic(x, y), SeparationDetected);
}

TEST_CASE("input validation") {
  DesignMatrix x{Eigen::MatrixXd::Ones(3, 1), {}};
  Eigen::VectorXd y(3);
  y << 0, 2, 1;
  CHECK_THROWS_AS(fit_logistic(x, y), InvalidArgument);
  CHECK_THROWS_AS(fit_logistic(x, Eigen::VectorXd(Eigen::VectorXd::Zero(4))), DimensionMismatch);
  CHECK_THROWS_AS(predict_proba(Eigen::VectorXd::Zero(2).eval(), x), DimensionMismatch);
}

TEST_CASE("collinear columns give a singular Hessian") {
  std::mt19937_64 rng(3);
  auto p = simulate_logistic(rng, 100, Eigen::Vector2d(0.2, 0.5), true);
  p.x.values.conservativeResize(Eigen::NoChange, 3);
  p.x.values.col(2) = 2 * p.x.values.col(1);
  p.x.labels.push_back({Block::Scalar, "dup"});
  CHECK_THROWS_AS(fit_logistic(p.x, p.y), SingularHessian);
}

TEST_CASE("MLE agrees with an independent grid search (200 x 4)") {
  std::mt19937_64 rng(4);
  Eigen::VectorXd truth(4);
  truth << 0.3, -0.8, 0.5, 1.0;
  const auto p = simulate_logistic(rng, 200, truth, true);
  const auto fit = fit_logistic(p.x, p.y);
  REQUIRE(fit.converged);
  CHECK(fit.gradient_norm <= 1e-8);

  // Coarse lattice around the truth, then a finer lattice around its winner.
  const Eigen::VectorXd coarse = grid_search(p, truth, 0.1, 10);
  CHECK((coarse - fit.coefficients).cwiseAbs().maxCoeff() <= 0.1);
  const Eigen::VectorXd fine = grid_search(p, coarse, 0.01, 12);
  CHECK((fine - fit.coefficients).cwiseAbs().maxCoeff() <= 0.01);
}

TEST_CASE("small designs match exhaustive search and satisfy the gradient bound") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = simulate_logistic(rng, 50, Eigen::Vector3d(-0.2, 0.7, 0.4), true);
    const auto fit = fit_logistic(p.x, p.y);
    REQUIRE(fit.converged);
    CHECK(fit.gradient_norm <= 1e-6);
    const Eigen::VectorXd coarse = grid_search(p, Eigen::Vector3d(-0.2, 0.7, 0.4), 0.05, 40);
    const Eigen::VectorXd fine = grid_search(p, coarse, 0.005, 12);
    CHECK((fine - fit.coefficients).cwiseAbs().maxCoeff() <= 0.005);
  }
}

TEST_CASE("Newton iterations never decrease the objective") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd truth = Eigen::VectorXd::Random(5) * 2;
    const auto p = simulate_logistic(rng, 300, truth, rep % 2 == 0);
    const auto fit = fit_logistic(p.x, p.y);
    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) {
      REQUIRE(fit.loglik_trace[k] >= fit.loglik_trace[k - 1]);
    }
    CHECK(fit.final_loglik == fit.loglik_trace.back());
  }
}

TEST_CASE("log-likelihood values") {
  std::mt19937_64 rng(7);
  const auto p = simulate_logistic(rng, 120, Eigen::Vector3d(0.1, 1.2, -0.6), true);
  CHECK(log_likelihood(Eigen::VectorXd::Zero(3).eval(), p.x, p.y) ==
        doctest::Approx(-120 * std::log(2.0)).epsilon(1e-14));

  const auto fit = fit_logistic(p.x, p.y);
  const double at_mle = log_likelihood(fit, p.x, p.y);
  CHECK(at_mle == doctest::Approx(fit.final_loglik).epsilon(1e-14));
  std::normal_distribution<double> z(0, 1);
  for (int dir = 0; dir < 20; ++dir) {
    Eigen::Vector3d d(z(rng), z(rng), z(rng));
    double previous = at_mle;
    for (double s : {1e-3, 1e-2, 0.1, 0.5}) {
      const double v = log_likelihood(Eigen::VectorXd(fit.coefficients + s * d), p.x, p.y);
      CHECK(v <= previous + 1e-9);
      previous = v;
    }
  }

  // Bernoulli product form in log space.
  const Eigen::VectorXd pi = predict_proba(fit, p.x);
  double product_form = 0;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    product_form += p.y(i) * std::log(pi(i)) + (1 - p.y(i)) * std::log(1 - pi(i));
  }
  CHECK(product_form == doctest::Approx(at_mle).epsilon(1e-10));
}

TEST_CASE("rescaling a column rescales its coefficient only") {
  std::mt19937_64 rng(8);
  auto p = simulate_logistic(rng, 250, Eigen::Vector3d(0.4, -1.0, 0.7), true);
  const auto base = fit_logistic(p.x, p.y);
  const Eigen::VectorXd probs = predict_proba(base, p.x);
  for (double s : {1e-3, -2.5, 1e3}) {
    auto scaled = p;
    scaled.x.values.col(2) *= s;
    const auto fit = fit_logistic(scaled.x, scaled.y);
    CHECK(fit.coefficients(2) * s == doctest::Approx(base.coefficients(2)).epsilon(1e-8));
    CHECK((predict_proba(fit, scaled.x) - probs).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("zero coefficients predict one half") {
  DesignMatrix x{Eigen::MatrixXd::Random(10, 3), {}};
  const Eigen::VectorXd pi = predict_proba(Eigen::VectorXd::Zero(3).eval(), x);
  CHECK((pi.array() == 0.5).all());
}
