#include "mixpred/crossval.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace mixpred {

bool CvReport::any_ridge() const {
  for (bool r : fold_ridge) {
    if (r) return true;
  }
  return false;
}

namespace {

// Uniform integer in [0, bound) by rejection on the raw 64-bit output.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % bound;
}

std::string num(double v, const char* fmt) {
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("cross-validation needs k >= 2");
  const auto kk = static_cast<std::size_t>(k);
  const auto order = permutation(n, seed);
  std::vector<int> fold(n);
  std::size_t at = 0;
  for (std::size_t f = 0; f < kk; ++f) {
    const std::size_t size = n / kk + (f < n % kk ? 1 : 0);
    for (std::size_t s = 0; s < size; ++s) fold[order[at++]] = static_cast<int>(f);
  }
  return fold;
}

CvReport cross_validate(const MixedDataset& data, const CvOptions& options) {
  if (options.k < 2) throw InvalidArgument("cross-validation needs k >= 2");
  data.validate(true);
  const auto n = static_cast<std::size_t>(data.size());
  if (n < 4 * static_cast<std::size_t>(options.k)) {
    throw EmptySubsample(std::to_string(n) + " observations are too few for " + std::to_string(options.k) +
                         "-fold cross-validation (need at least " + std::to_string(4 * options.k) + ")");
  }
  const auto fold = assign_folds(n, options.k, options.seed);

  CvReport rep;
  rep.k = options.k;
  rep.seed = options.seed;
  rep.n = n;
  for (int f = 0; f < options.k; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    const MixedDataset train_set = data.subset(train);
    const MixedDataset test_set = data.subset(test);

    MixedFitOptions fo;
    fo.lambda = options.lambda;
    fo.include_intercept = options.include_intercept;
    bool ridge = false;
    MixedFit model = [&] {
      try {
        return fit(train_set, fo);
      } catch (const SeparationDetected&) {
        ridge = true;
        fo.glm.ridge = options.fallback_ridge;
        return fit(train_set, fo);
      }
    }();

    if (options.on_fold) options.on_fold(f, model);
    const Eigen::VectorXi predicted = classify(predict(model, test_set));
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
      if (predicted(i) == static_cast<int>(test_set.response(i))) ++hits;
    }
    rep.fold_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(test.size()));
    rep.fold_size.push_back(test.size());
    rep.fold_ridge.push_back(ridge);
  }
  rep.mean_accuracy =
      std::accumulate(rep.fold_accuracy.begin(), rep.fold_accuracy.end(), 0.0) / static_cast<double>(options.k);
  return rep;
}

CvReport cross_validate(const std::vector<MarketRecord>& records, const CvOptions& options) {
  return cross_validate(to_dataset(records), options);
}

std::vector<double> tau_grid(double tau_max, double step) {
  if (!(step > 0)) throw InvalidArgument("tau step must be positive");
  if (!(tau_max >= 0 && tau_max <= 0.1)) throw InvalidArgument("tau grid must lie within [0, 0.1]");
  std::vector<double> taus;
  // Multiply rather than accumulate so grid points are exact multiples.
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t > tau_max * (1 + 1e-12)) break;
    taus.push_back(t);
  }
  return taus;
}

SweepResult tau_sweep(const std::vector<MarketRecord>& records, const std::vector<double>& taus,
                      const CvOptions& options) {
  SweepResult out;
  for (double tau : taus) {
    if (!(tau >= 0 && tau <= 0.1)) throw InvalidArgument("tau grid must lie within [0, 0.1]");
    SweepRow row;
    row.tau = tau;
    row.n_kept = count_above(records, tau);
    try {
      CvReport rep = cross_validate(threshold_subsample(records, tau), options);
      row.mean_accuracy = rep.mean_accuracy;
      std::string ridge;
      for (std::size_t f = 0; f < rep.fold_ridge.size(); ++f) {
        if (rep.fold_ridge[f]) ridge += (ridge.empty() ? "" : " ") + std::to_string(f + 1);
      }
      if (!ridge.empty()) row.flags = "ridge-folds:" + ridge;
    } catch (const EmptySubsample&) {
      row.flags = "empty";
    } catch (const Error& e) {
      row.flags = std::string("failed:") + error_kind_name(e.kind());
    }
    out.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& acc = out.rows[i].mean_accuracy;
    if (acc && (!out.best || *acc > *out.rows[*out.best].mean_accuracy)) out.best = i;
  }
  return out;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "tau,n_kept,mean_accuracy,flags\n";
  for (const auto& r : sweep.rows) {
    out << num(r.tau, "%.6g") << ',' << r.n_kept << ','
        << (r.mean_accuracy ? num(*r.mean_accuracy, "%.6f") : std::string()) << ',' << r.flags << '\n';
  }
}

void write_cv_report(const CvReport& report, std::ostream& out) {
  out << "n " << report.n << "\nk " << report.k << "\nseed " << report.seed << "\ntau "
      << num(report.tau, "%.6g") << '\n';
  out << "fold,size,accuracy,ridge\n";
  for (std::size_t f = 0; f < report.fold_accuracy.size(); ++f) {
    out << f + 1 << ',' << report.fold_size[f] << ',' << num(report.fold_accuracy[f], "%.6f") << ','
        << (report.fold_ridge[f] ? "yes" : "no") << '\n';
  }
  out << "mean_accuracy " << num(report.mean_accuracy, "%.6f") << '\n';
}

}  // namespace mixpred
