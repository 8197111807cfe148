#include "mixpred/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <thread>

namespace mixpred {

void SimConfig::validate() const {
  if (n < 10) throw InvalidArgument("simulation needs n >= 10");
  if (grid_size < 2) throw InvalidArgument("simulation grid needs at least 2 points");
  if (terms < 1) throw InvalidArgument("generator needs at least one series term");
  if (replicates < 1) throw InvalidArgument("simulation needs at least one replicate");
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be finite and >= 0");
  if (!(lambda > 0 && lambda <= 1)) throw InvalidArgument("lambda must lie in (0, 1]");
}

std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t replicate_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate_index),
                    static_cast<std::uint32_t>(replicate_index >> 32)};
  return std::mt19937_64(seq);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// T x J matrix of sqrt(2) cos(j pi t).
Eigen::MatrixXd cosine_basis(const Grid& grid, int terms) {
  Eigen::MatrixXd phi(grid.size(), terms);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double t = grid.at(k);
    for (int j = 1; j <= terms; ++j) phi(k, j - 1) = std::sqrt(2.0) * std::cos(j * kPi * t);
  }
  return phi;
}

Eigen::VectorXd beta_coefficients(int terms) {
  Eigen::VectorXd b(terms);
  for (int j = 1; j <= terms; ++j) {
    b(j - 1) = j == 1 ? 0.3 : 4.0 * (j % 2 == 1 ? 1.0 : -1.0) / (static_cast<double>(j) * j);
  }
  return b;
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

MeanSd mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {};
  double s = 0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  return {m, sample_sd(v, m)};
}

}  // namespace

FunctionalSample true_beta(const Grid& grid, int terms) {
  return {grid, cosine_basis(grid, terms) * beta_coefficients(terms)};
}

SimData generate(const SimConfig& config, std::uint64_t replicate_index) {
  config.validate();
  const Eigen::Index n = config.n;
  const int terms = config.terms;
  const Grid grid = Grid::linspace(0.0, 1.0, config.grid_size);
  const Eigen::MatrixXd phi = cosine_basis(grid, terms);

  auto rng = replicate_stream(config.seed, replicate_index);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> score(-std::sqrt(3.0), std::sqrt(3.0));

  SimData out;
  out.truth.beta = true_beta(grid, terms);
  MixedDataset& d = out.data;

  d.scalar.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.scalar(i) = normal(rng);

  d.compositions.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      double u = 0;
      while (u == 0) u = unit(rng);
      d.compositions(i, j) = u;
    }
    d.compositions.row(i) /= d.compositions.row(i).sum();
  }

  Eigen::VectorXd weights(terms);
  for (int j = 1; j <= terms; ++j) {
    weights(j - 1) = (j % 2 == 1 ? 1.0 : -1.0) * std::pow(static_cast<double>(j), -config.decay / 2);
  }
  Eigen::MatrixXd z_scores(n, terms);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < terms; ++j) z_scores(i, j) = score(rng);
  }
  Eigen::MatrixXd curves = (z_scores * weights.asDiagonal()) * phi.transpose();
  d.curves = CurveSet(grid, std::move(curves));

  Eigen::VectorXd noise(n);
  for (Eigen::Index i = 0; i < n; ++i) noise(i) = normal(rng);

  // Every predictor enters the linear predictor centered at its sample mean.
  const Eigen::VectorXd alpha_star = ilr(Composition(out.truth.alpha)).coords();
  const Eigen::MatrixXd ilr_c = ilr_rows(d.compositions);
  const Eigen::RowVectorXd ilr_mean = ilr_c.colwise().mean();
  const Eigen::RowVectorXd curve_mean = d.curves.values.colwise().mean();
  const double z_mean = d.scalar.mean();
  const Eigen::VectorXd functional =
      ((d.curves.values.rowwise() - curve_mean) * out.truth.beta.values) * grid.step();
  const Eigen::VectorXd eta = out.truth.gamma * (d.scalar.array() - z_mean).matrix() +
                              (ilr_c.rowwise() - ilr_mean) * alpha_star + functional +
                              config.sigma * noise;

  d.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.response(i) = unit(rng) < logistic(eta(i)) ? 1.0 : 0.0;
  return out;
}

double mise(const FunctionalSample& estimate, const FunctionalSample& truth) {
  if (!estimate.grid.matches(truth.grid)) throw GridMismatch("MISE needs curves on the same grid");
  const Eigen::VectorXd diff = estimate.values - truth.values;
  return quadrature_inner_product(diff, diff, truth.grid);
}

double curve_correlation(const FunctionalSample& estimate, const FunctionalSample& truth) {
  if (!estimate.grid.matches(truth.grid)) throw GridMismatch("correlation needs curves on the same grid");
  const Eigen::ArrayXd a = estimate.values.array() - estimate.values.mean();
  const Eigen::ArrayXd b = truth.values.array() - truth.values.mean();
  const double saa = a.square().sum();
  const double sbb = b.square().sum();
  // Relative floor: a constant curve leaves only rounding residue after centering.
  const double floor_a = 1e-24 * estimate.values.squaredNorm();
  const double floor_b = 1e-24 * truth.values.squaredNorm();
  if (!(saa > floor_a) || !(sbb > floor_b)) throw ZeroVariance("correlation of a constant curve is undefined");
  return std::clamp((a * b).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

ReplicateResult run_replicate(const SimConfig& config, std::uint64_t replicate_index) {
  ReplicateResult r;
  try {
    const SimData sim = generate(config, replicate_index);
    MixedFitOptions opt;
    opt.lambda = config.lambda;
    opt.include_intercept = false;
    const MixedFit model = fit(sim.data, opt);
    r.correlation = curve_correlation(model.beta_curve, sim.truth.beta);
    r.mise = mise(model.beta_curve, sim.truth.beta);
    // The scalar column is standardized, so compare on the raw scale of z.
    r.gamma_bias = model.gamma_raw() - sim.truth.gamma;
    r.alpha_bias = model.alpha.parts() - sim.truth.alpha;
    r.order = model.basis.order();
    r.ok = true;
  } catch (const Error& e) {
    r.failure = e.what();
  }
  return r;
}

SimReport summarize(const SimConfig& config, const std::vector<ReplicateResult>& results) {
  SimReport rep;
  rep.config = config;
  std::vector<double> cor, err, gam, al[3];
  double order = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++rep.failed;
      continue;
    }
    ++rep.succeeded;
    cor.push_back(r.correlation);
    err.push_back(r.mise);
    gam.push_back(r.gamma_bias);
    for (int k = 0; k < 3; ++k) al[k].push_back(r.alpha_bias(k));
    order += static_cast<double>(r.order);
  }
  const auto total = static_cast<double>(results.size());
  if (results.empty() || rep.failed >= 0.05 * total) {
    std::string first;
    for (const auto& r : results) {
      if (!r.ok) {
        first = r.failure;
        break;
      }
    }
    throw StudyFailure("n=" + std::to_string(config.n) + " sigma=" + std::to_string(config.sigma) + ": " +
                       std::to_string(rep.failed) + " of " + std::to_string(results.size()) +
                       " replicates failed" + (first.empty() ? "" : " (first: " + first + ")"));
  }
  rep.correlation = mean_sd(cor);
  rep.mise = mean_sd(err);
  rep.gamma_bias = mean_sd(gam);
  for (int k = 0; k < 3; ++k) rep.alpha_bias[k] = mean_sd(al[k]);
  rep.mean_order = order / rep.succeeded;
  return rep;
}

std::vector<SimReport> run_study(const std::vector<SimConfig>& configs, unsigned threads) {
  for (const auto& c : configs) c.validate();
  threads = std::max(1u, threads);
  std::vector<SimReport> reports;
  reports.reserve(configs.size());
  for (const auto& config : configs) {
    std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < results.size();) results[i] = run_replicate(config, i);
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    reports.push_back(summarize(config, results));
  }
  return reports;
}

namespace {

std::string num(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string cell(const MeanSd& m) { return num(m.mean, "%.3f") + " (" + num(m.sd, "%.3f") + ")"; }

}  // namespace

void write_report_csv(const std::vector<SimReport>& reports, std::ostream& out) {
  out << "n,sigma,replicates,seed,succeeded,failed,mean_order,cor_mean,cor_sd,mise_mean,mise_sd,"
         "gamma_bias_mean,gamma_bias_sd,alpha1_bias_mean,alpha1_bias_sd,alpha2_bias_mean,alpha2_bias_sd,"
         "alpha3_bias_mean,alpha3_bias_sd\n";
  for (const auto& r : reports) {
    out << r.config.n << ',' << num(r.config.sigma) << ',' << r.config.replicates << ',' << r.config.seed
        << ',' << r.succeeded << ',' << r.failed << ',' << num(r.mean_order) << ','
        << num(r.correlation.mean) << ',' << num(r.correlation.sd) << ',' << num(r.mise.mean) << ','
        << num(r.mise.sd) << ',' << num(r.gamma_bias.mean) << ',' << num(r.gamma_bias.sd);
    for (const auto& a : r.alpha_bias) out << ',' << num(a.mean) << ',' << num(a.sd);
    out << '\n';
  }
}

void write_report_tables(const std::vector<SimReport>& reports, std::ostream& out) {
  std::vector<Eigen::Index> sizes;
  std::vector<double> sigmas;
  std::map<std::pair<double, Eigen::Index>, const SimReport*> at;
  for (const auto& r : reports) {
    if (std::find(sizes.begin(), sizes.end(), r.config.n) == sizes.end()) sizes.push_back(r.config.n);
    if (std::find(sigmas.begin(), sigmas.end(), r.config.sigma) == sigmas.end()) sigmas.push_back(r.config.sigma);
    at[{r.config.sigma, r.config.n}] = &r;
  }
  std::sort(sizes.begin(), sizes.end());
  std::sort(sigmas.begin(), sigmas.end());

  constexpr int kLabel = 16;
  constexpr int kCell = 17;
  auto pad = [](const std::string& s, int w) {
    return s.size() >= static_cast<std::size_t>(w) ? s : std::string(w - s.size(), ' ') + s;
  };
  auto header = [&](const std::string& title) {
    out << title << '\n' << pad("sample size", kLabel);
    for (auto n : sizes) out << pad(std::to_string(n), kCell);
    out << '\n';
  };
  auto row = [&](const std::string& label, double sigma, auto metric) {
    out << pad(label, kLabel);
    for (auto n : sizes) {
      auto it = at.find({sigma, n});
      out << pad(it == at.end() ? "-" : cell(metric(*it->second)), kCell);
    }
    out << '\n';
  };
  auto sigma_label = [](double s) { return "sigma=" + num(s, "%g"); };

  header("Correlation of estimated and true beta(t), mean (sd)");
  for (double s : sigmas) row(sigma_label(s), s, [](const SimReport& r) { return r.correlation; });
  out << '\n';
  header("MISE of estimated beta(t), mean (sd)");
  for (double s : sigmas) row(sigma_label(s), s, [](const SimReport& r) { return r.mise; });
  out << '\n';
  header("Bias of gamma, mean (sd)");
  for (double s : sigmas) row(sigma_label(s), s, [](const SimReport& r) { return r.gamma_bias; });
  out << '\n';
  header("Bias of alpha, mean (sd)");
  for (double s : sigmas) {
    for (int k = 0; k < 3; ++k) {
      row((k == 0 ? sigma_label(s) + " " : std::string()) + "alpha" + std::to_string(k + 1), s,
          [k](const SimReport& r) { return r.alpha_bias[k]; });
    }
  }
}

}  // namespace mixpred
