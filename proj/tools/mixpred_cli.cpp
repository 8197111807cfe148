// mixpred: simulation study, model fitting, cross-validation, threshold
// sweep and coefficient reports for the mixed-predictor classifier.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mixpred/crossval.hpp"
#include "mixpred/fixtures.hpp"
#include "mixpred/market.hpp"
#include "mixpred/report.hpp"
#include "mixpred/simulate.hpp"

using namespace mixpred;

namespace {

// Writes to the named file, or to stdout when the path is empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw InvalidArgument("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<MarketRecord> load(const std::string& path, const std::string& phase) {
  auto records = ingest(path);
  if (!phase.empty()) records = slice(records, parse_phase(phase));
  return records;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary classification from scalar, compositional and functional predictors"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo study on the known generating model");
  std::vector<long> sim_n{100, 1000, 10000};
  std::vector<double> sim_sigma{0.2, 0.6};
  int sim_reps = 200;
  std::uint64_t sim_seed = 20190101;
  double sim_lambda = 0.85;
  unsigned sim_threads = std::max(1u, std::thread::hardware_concurrency());
  std::string sim_out, sim_tables;
  sim->add_option("--n", sim_n, "Sample sizes")->capture_default_str();
  sim->add_option("--sigma", sim_sigma, "Noise scales")->capture_default_str();
  sim->add_option("--replicates", sim_reps, "Replicates per configuration")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--lambda", sim_lambda, "Variance fraction kept by the basis")->capture_default_str();
  sim->add_option("--threads", sim_threads, "Worker threads (output does not depend on this)");
  sim->add_option("--out", sim_out, "CSV report path (default: stdout)");
  sim->add_option("--tables", sim_tables, "Text tables path (default: stdout after the CSV)");

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit the classifier to a market file");
  std::string fit_data, fit_phase, fit_out;
  double fit_lambda = 0.99;
  bool fit_intercept = true;
  fitc->add_option("--data", fit_data, "Input CSV")->required();
  fitc->add_option("--lambda", fit_lambda, "Variance fraction kept by the basis")->capture_default_str();
  fitc->add_option("--phase", fit_phase, "Preset 1-3 or FROM:TO (YYYY-MM-DD)");
  fitc->add_option("--intercept", fit_intercept, "Include an intercept (true/false)")->capture_default_str();
  fitc->add_option("--out", fit_out, "Model file path (default: stdout)");

  // cv
  auto* cvc = app.add_subcommand("cv", "k-fold cross-validated accuracy");
  std::string cv_data, cv_phase;
  int cv_k = 5;
  std::uint64_t cv_seed = 1;
  double cv_lambda = 0.99, cv_tau = 0;
  cvc->add_option("--data", cv_data, "Input CSV")->required();
  cvc->add_option("--k", cv_k, "Folds")->capture_default_str();
  cvc->add_option("--seed", cv_seed, "Fold assignment seed")->capture_default_str();
  cvc->add_option("--lambda", cv_lambda, "Variance fraction kept by the basis")->capture_default_str();
  cvc->add_option("--tau", cv_tau, "Keep only days with |open return| > tau")->capture_default_str();
  cvc->add_option("--phase", cv_phase, "Preset 1-3 or FROM:TO (YYYY-MM-DD)");

  // sweep
  auto* swc = app.add_subcommand("sweep", "Cross-validated accuracy over a grid of thresholds");
  std::string sw_data, sw_phase, sw_out;
  double sw_max = 0.01, sw_step = 0.0005, sw_lambda = 0.99;
  int sw_k = 5;
  std::uint64_t sw_seed = 1;
  swc->add_option("--data", sw_data, "Input CSV")->required();
  swc->add_option("--tau-max", sw_max, "Largest threshold")->capture_default_str();
  swc->add_option("--tau-step", sw_step, "Threshold step")->capture_default_str();
  swc->add_option("--k", sw_k, "Folds")->capture_default_str();
  swc->add_option("--seed", sw_seed, "Fold assignment seed")->capture_default_str();
  swc->add_option("--lambda", sw_lambda, "Variance fraction kept by the basis")->capture_default_str();
  swc->add_option("--phase", sw_phase, "Preset 1-3 or FROM:TO (YYYY-MM-DD)");
  swc->add_option("--out", sw_out, "CSV path (default: stdout)");

  // report
  auto* rep = app.add_subcommand("report", "Coefficient table and beta(t) curve from a model file");
  std::string rep_model, rep_dir = ".";
  rep->add_option("--model", rep_model, "Model file written by 'fit'")->required();
  rep->add_option("--out-dir", rep_dir, "Output directory")->capture_default_str();

  // synth
  auto* syn = app.add_subcommand("synth", "Write a synthetic market file");
  std::string syn_kind = "signal", syn_out, syn_start = "2014-12-02";
  std::size_t syn_n = 300;
  std::uint64_t syn_seed = 1;
  syn->add_option("--kind", syn_kind, "signal, noise or graded")->capture_default_str();
  syn->add_option("--n", syn_n, "Rows")->capture_default_str();
  syn->add_option("--seed", syn_seed, "Random seed")->capture_default_str();
  syn->add_option("--start", syn_start, "First date")->capture_default_str();
  syn->add_option("--out", syn_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) {
      std::vector<SimConfig> configs;
      for (double s : sim_sigma) {
        for (long n : sim_n) {
          SimConfig c;
          c.n = n;
          c.sigma = s;
          c.replicates = sim_reps;
          c.seed = sim_seed;
          c.lambda = sim_lambda;
          configs.push_back(c);
        }
      }
      const auto reports = run_study(configs, sim_threads);
      Sink csv(sim_out);
      write_report_csv(reports, csv.stream());
      Sink tables(sim_tables);
      if (!csv.to_file() && !tables.to_file()) std::cout << '\n';
      write_report_tables(reports, tables.stream());
    } else if (*fitc) {
      MixedFitOptions opt;
      opt.lambda = fit_lambda;
      opt.include_intercept = fit_intercept;
      const MixedFit model = fit(to_dataset(load(fit_data, fit_phase)), opt);
      Sink out(fit_out);
      save_model(model, out.stream());
      if (out.to_file()) {
        std::cout << "basis order " << model.basis.order() << ", converged "
                  << (model.diagnostics.converged ? "yes" : "no") << ", log-likelihood "
                  << fmt(model.diagnostics.final_loglik, "%.6f") << '\n';
      }
    } else if (*cvc) {
      CvOptions opt;
      opt.k = cv_k;
      opt.seed = cv_seed;
      opt.lambda = cv_lambda;
      CvReport r = cross_validate(threshold_subsample(load(cv_data, cv_phase), cv_tau), opt);
      r.tau = cv_tau;
      write_cv_report(r, std::cout);
    } else if (*swc) {
      CvOptions opt;
      opt.k = sw_k;
      opt.seed = sw_seed;
      opt.lambda = sw_lambda;
      const SweepResult s = tau_sweep(load(sw_data, sw_phase), tau_grid(sw_max, sw_step), opt);
      Sink out(sw_out);
      write_sweep_csv(s, out.stream());
      std::ostream& note = out.to_file() ? std::cout : std::cerr;
      if (s.best) {
        const auto& b = s.rows[*s.best];
        note << "max accuracy " << fmt(*b.mean_accuracy, "%.6f") << " at tau " << fmt(b.tau, "%.6g") << " (n "
             << b.n_kept << ")\n";
      } else {
        note << "no threshold left enough observations\n";
      }
    } else if (*rep) {
      std::ifstream in(rep_model);
      if (!in) throw ParseError("cannot open '" + rep_model + "'");
      write_report(load_model(in), rep_dir);
    } else if (*syn) {
      FixtureOptions opt;
      opt.kind = parse_fixture_kind(syn_kind);
      opt.n = syn_n;
      opt.seed = syn_seed;
      opt.start = parse_date(syn_start);
      Sink out(syn_out);
      write_market_csv(make_fixture(opt), out.stream());
    }
  } catch (const Error& e) {
    std::cerr << "mixpred: " << error_kind_name(e.kind()) << " error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "mixpred: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
