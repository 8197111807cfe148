#include "mixpred/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "mixpred/market.hpp"

namespace mixpred {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // Avoid printing "-0.00".
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

}  // namespace

std::vector<std::string> intraday_time_labels() {
  std::vector<std::string> labels;
  auto add = [&](int from, int to) {
    for (int m = from; m <= to; m += 5) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%02d:%02d", m / 60, m % 60);
      labels.emplace_back(buf);
    }
  };
  add(9 * 60 + 35, 11 * 60 + 30);
  add(13 * 60, 15 * 60);
  return labels;
}

void write_coefficient_table(const MixedFit& model, std::ostream& out) {
  constexpr int kWidth = 9;
  auto pad = [](const std::string& s) {
    return s.size() >= kWidth ? s + " " : std::string(kWidth - s.size(), ' ') + s;
  };
  const bool market = model.parts() == static_cast<Eigen::Index>(kEmotions.size());
  for (Eigen::Index j = 0; j < model.parts(); ++j) {
    out << pad(market ? std::string(kEmotions[static_cast<std::size_t>(j)]) : "part" + std::to_string(j + 1));
  }
  out << pad(market ? "volume" : "scalar") << '\n';
  for (Eigen::Index j = 0; j < model.parts(); ++j) out << pad(fixed(model.alpha[j], 2));
  out << pad(fixed(model.gamma, 2)) << '\n';
  out << '\n';
  out << "emotion coefficients form a composition (sum to 1); volume is per standard deviation\n";
  if (model.intercept) out << "intercept " << fixed(*model.intercept, 4) << '\n';
  out << "basis order " << model.basis.order() << " at lambda " << fixed(model.lambda, 2) << '\n';
  if (model.diagnostics.ridge > 0) {
    out << "penalized fit: ridge " << model.diagnostics.ridge << '\n';
  }
  if (!model.diagnostics.converged) out << "warning: optimizer did not converge\n";
}

void write_beta_csv(const MixedFit& model, std::ostream& out) {
  const auto labels = intraday_time_labels();
  if (model.beta_curve.values.size() != static_cast<Eigen::Index>(labels.size())) {
    throw DimensionMismatch("coefficient curve has " + std::to_string(model.beta_curve.values.size()) +
                            " points; the intraday report needs " + std::to_string(labels.size()));
  }
  out << "time,beta\n";
  for (std::size_t k = 0; k < labels.size(); ++k) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", model.beta_curve.values(static_cast<Eigen::Index>(k)));
    out << labels[k] << ',' << buf << '\n';
  }
}

void write_report(const MixedFit& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  std::ofstream table(base / "coefficients.txt");
  std::ofstream beta(base / "beta.csv");
  if (!table || !beta) throw InvalidArgument("cannot write report files into '" + dir + "'");
  write_coefficient_table(model, table);
  write_beta_csv(model, beta);
}

}  // namespace mixpred
