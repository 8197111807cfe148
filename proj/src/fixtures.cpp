#include "mixpred/fixtures.hpp"

#include <cmath>
#include <random>

namespace mixpred {

FixtureKind parse_fixture_kind(std::string_view name) {
  if (name == "signal") return FixtureKind::Signal;
  if (name == "noise") return FixtureKind::Noise;
  if (name == "graded") return FixtureKind::Graded;
  throw InvalidArgument("fixture kind must be signal, noise or graded");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Predictors {
  double volume;
  std::array<double, 5> counts;
  Eigen::VectorXd curve;
  double eta;  // linear predictor of the generating model, in standard units
};

// Draws one day's predictors. Intraday curves are three smooth shapes plus a
// little jitter, so a 99% basis stays small.
Predictors draw(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0, 1);
  std::uniform_int_distribution<int> base(40, 400);
  Predictors p;
  const double v = normal(rng);
  p.volume = 2e9 * std::exp(0.25 * v);

  std::array<double, 5> log_share{};
  for (auto& l : log_share) l = 0.6 * normal(rng);
  for (std::size_t e = 0; e < 5; ++e) p.counts[e] = std::round(base(rng) * std::exp(log_share[e]));
  for (auto& c : p.counts) c = std::max(c, 1.0);

  const double s1 = normal(rng), s2 = normal(rng), s3 = normal(rng);
  p.curve.resize(kIntradayPoints);
  for (int k = 0; k < kIntradayPoints; ++k) {
    const double t = static_cast<double>(k) / (kIntradayPoints - 1);
    p.curve(k) = 1e-3 * (s1 * std::sqrt(2.0) * std::cos(kPi * t) + 0.6 * s2 * std::sqrt(2.0) * std::cos(2 * kPi * t) +
                         0.3 * s3 * std::sqrt(2.0) * std::sin(kPi * t)) +
                 2e-6 * normal(rng);
  }

  // Signal in all three blocks: volume, the joy-to-fear balance, and the
  // first curve shape.
  const double balance = std::log(p.counts[2] / p.counts[4]);
  p.eta = -1.5 * (p.volume / 2e9 - 1) / 0.25 + 2.0 * balance + 1.5 * s1;
  return p;
}

double logistic_noise(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  double x = 0;
  while (x == 0 || x == 1) x = u(rng);
  return std::log(x / (1 - x));
}

}  // namespace

std::vector<MarketRecord> make_fixture(const FixtureOptions& options) {
  if (options.n == 0) throw InvalidArgument("fixture needs at least one row");
  if (!options.start.ok()) throw InvalidArgument("fixture start date is invalid");
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0, 1);
  std::exponential_distribution<double> magnitude(1.0 / 0.004);
  std::uniform_real_distribution<double> u(0, 1);

  std::vector<MarketRecord> out;
  out.reserve(options.n);
  std::chrono::sys_days day{options.start};
  for (std::size_t i = 0; i < options.n; ++i, day += std::chrono::days{1}) {
    const Predictors p = draw(rng);
    MarketRecord r;
    r.date = Date{day};
    r.volume = p.volume;
    double total = 0;
    for (double c : p.counts) total += c;
    for (std::size_t e = 0; e < 5; ++e) r.emotions[e] = p.counts[e] / total;
    r.intraday = p.curve;

    switch (options.kind) {
      case FixtureKind::Signal:
        r.open_return = 1e-3 * (p.eta + 0.5 * logistic_noise(rng));
        break;
      case FixtureKind::Noise:
        r.open_return = 5e-3 * normal(rng);
        break;
      case FixtureKind::Graded: {
        // The size of the move is independent of the predictors; its sign
        // agrees with the model more often the larger the move.
        const double size = magnitude(rng);
        const double agree = 0.5 + 0.45 * std::min(1.0, size / 0.008);
        const double sign_model = p.eta > 0 ? 1.0 : -1.0;
        r.open_return = (u(rng) < agree ? sign_model : -sign_model) * size;
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mixpred
