// Text serialization of fitted models. Every real is written as a C99 hex
// float so reloading reproduces the exact bits.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mixpred/mixmodel.hpp"

namespace mixpred {

namespace {

constexpr const char* kMagic = "mixpred-model";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void put(std::ostream& out, const std::string& key, double v) { out << key << ' ' << hex(v) << '\n'; }

template <typename Derived>
void put_vector(std::ostream& out, const std::string& key, const Eigen::DenseBase<Derived>& v) {
  out << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << hex(v(i));
  out << '\n';
}

using Fields = std::map<std::string, std::vector<std::string>>;

const std::vector<std::string>& field(const Fields& f, const std::string& key) {
  auto it = f.find(key);
  if (it == f.end()) throw ParseError("model file is missing field '" + key + "'");
  return it->second;
}

double parse_real(const std::string& token, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw ParseError("field '" + key + "': cannot parse '" + token + "' as a real");
  }
  return v;
}

long parse_int(const std::string& token, const std::string& key) {
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0') {
    throw ParseError("field '" + key + "': cannot parse '" + token + "' as an integer");
  }
  return v;
}

double real_field(const Fields& f, const std::string& key) {
  const auto& t = field(f, key);
  if (t.size() != 1) throw ParseError("field '" + key + "' expects one value");
  return parse_real(t[0], key);
}

Eigen::VectorXd vector_field(const Fields& f, const std::string& key) {
  const auto& t = field(f, key);
  if (t.empty()) throw ParseError("field '" + key + "' is empty");
  const long n = parse_int(t[0], key);
  if (n < 0 || static_cast<std::size_t>(n) + 1 != t.size()) {
    throw ParseError("field '" + key + "' declares " + t[0] + " values but has " +
                     std::to_string(t.size() - 1));
  }
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i) v(i) = parse_real(t[static_cast<std::size_t>(i) + 1], key);
  return v;
}

}  // namespace

void save_model(const MixedFit& model, std::ostream& out) {
  out << "# mixed-predictor logistic model; reals are hex floats\n";
  out << "format " << kMagic << ' ' << kVersion << '\n';
  put(out, "lambda", model.lambda);
  out << "has_intercept " << (model.intercept ? 1 : 0) << '\n';
  if (model.intercept) put(out, "intercept", *model.intercept);
  put(out, "gamma", model.gamma);
  put(out, "scalar_mean", model.centers.scalar_mean);
  put(out, "scalar_scale", model.centers.scalar_scale);
  put_vector(out, "ilr_mean", model.centers.ilr_mean);
  put_vector(out, "alpha_star", model.alpha_star);
  put_vector(out, "b", model.b);
  const Grid& g = model.basis.grid;
  out << "grid " << hex(g.start()) << ' ' << hex(g.step()) << ' ' << g.size() << '\n';
  put_vector(out, "mean_curve", model.basis.mean_curve);
  put_vector(out, "eigenvalues", model.basis.eigenvalues);
  put(out, "total_variance", model.basis.total_variance);
  put(out, "basis_lambda", model.basis.lambda);
  const Eigen::MatrixXd& phi = model.basis.eigenfunctions;
  out << "eigenfunctions " << phi.rows() << ' ' << phi.cols();
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    for (Eigen::Index i = 0; i < phi.rows(); ++i) out << ' ' << hex(phi(i, j));
  }
  out << '\n';
  const LogisticFit& d = model.diagnostics;
  out << "diag_converged " << (d.converged ? 1 : 0) << '\n';
  out << "diag_iterations " << d.iterations << '\n';
  put(out, "diag_loglik", d.final_loglik);
  put(out, "diag_gradient", d.gradient_norm);
  put(out, "diag_ridge", d.ridge);
  out << "end\n";
}

MixedFit load_model(std::istream& in) {
  Fields f;
  std::string line;
  bool ended = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream tokens(line);
    std::string key;
    tokens >> key;
    if (key == "end") {
      ended = true;
      break;
    }
    std::vector<std::string> values;
    for (std::string t; tokens >> t;) values.push_back(t);
    if (!f.emplace(key, std::move(values)).second) {
      throw ParseError("model file line " + std::to_string(lineno) + ": duplicate field '" + key + "'");
    }
  }
  if (!ended) throw ParseError("model file is truncated (no 'end' line)");

  const auto& fmt = field(f, "format");
  if (fmt.size() != 2 || fmt[0] != kMagic || parse_int(fmt[1], "format") != kVersion) {
    throw SchemaError("unsupported model format");
  }

  const auto& grid_tokens = field(f, "grid");
  if (grid_tokens.size() != 3) throw ParseError("field 'grid' expects start, step, size");
  const Grid grid(parse_real(grid_tokens[0], "grid"), parse_real(grid_tokens[1], "grid"),
                  parse_int(grid_tokens[2], "grid"));

  FpcaBasis basis;
  basis.grid = grid;
  basis.mean_curve = vector_field(f, "mean_curve");
  basis.eigenvalues = vector_field(f, "eigenvalues");
  basis.total_variance = real_field(f, "total_variance");
  basis.lambda = real_field(f, "basis_lambda");
  const auto& ef = field(f, "eigenfunctions");
  if (ef.size() < 2) throw ParseError("field 'eigenfunctions' lacks dimensions");
  const long rows = parse_int(ef[0], "eigenfunctions");
  const long cols = parse_int(ef[1], "eigenfunctions");
  if (rows != grid.size() || cols != basis.eigenvalues.size() ||
      ef.size() != static_cast<std::size_t>(rows * cols) + 2) {
    throw ParseError("field 'eigenfunctions' has inconsistent dimensions");
  }
  basis.eigenfunctions.resize(rows, cols);
  std::size_t at = 2;
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) basis.eigenfunctions(i, j) = parse_real(ef[at++], "eigenfunctions");
  }
  if (basis.mean_curve.size() != grid.size()) throw ParseError("mean curve does not match grid");

  Centers centers;
  centers.scalar_mean = real_field(f, "scalar_mean");
  centers.scalar_scale = real_field(f, "scalar_scale");
  centers.ilr_mean = vector_field(f, "ilr_mean");

  Eigen::VectorXd alpha_star = vector_field(f, "alpha_star");
  Eigen::VectorXd b = vector_field(f, "b");
  if (alpha_star.size() != centers.ilr_mean.size()) throw ParseError("alpha_star and ilr_mean differ in length");
  if (b.size() != basis.order()) throw ParseError("b does not match the basis order");

  LogisticFit diag;
  diag.converged = parse_int(field(f, "diag_converged").at(0), "diag_converged") != 0;
  diag.iterations = static_cast<int>(parse_int(field(f, "diag_iterations").at(0), "diag_iterations"));
  diag.final_loglik = real_field(f, "diag_loglik");
  diag.gradient_norm = real_field(f, "diag_gradient");
  diag.ridge = real_field(f, "diag_ridge");

  std::optional<double> intercept;
  if (parse_int(field(f, "has_intercept").at(0), "has_intercept") != 0) {
    intercept = real_field(f, "intercept");
  }
  const double gamma = real_field(f, "gamma");
  const Eigen::Index parts = alpha_star.size() + 1;
  Composition alpha = ilr_inv(IlrVector(alpha_star), parts);
  FunctionalSample beta = reconstruct_curve(basis, b);
  diag.coefficients = Eigen::VectorXd(0);

  MixedFit model{
      .intercept = intercept,
      .gamma = gamma,
      .alpha_star = std::move(alpha_star),
      .alpha = std::move(alpha),
      .b = std::move(b),
      .beta_curve = std::move(beta),
      .basis = std::move(basis),
      .centers = std::move(centers),
      .lambda = real_field(f, "lambda"),
      .diagnostics = std::move(diag),
  };
  model.diagnostics.coefficients = model.coefficients();
  return model;
}

}  // namespace mixpred
