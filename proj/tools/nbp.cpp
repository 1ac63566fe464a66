#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nbp/dataset_io.hpp"
#include "nbp/errors.hpp"
#include "nbp/experiment.hpp"
#include "nbp/theory_probe.hpp"

namespace {

enum ExitCode { kOk = 0, kDomain = 2, kNumeric = 3, kIo = 4 };

struct EngineFlags {
  std::string engine = "mcem";
  int iters = 15000;
  int burnin = 10000;
  int em_block = 100;
  double em_tol = 1e-6;
  int em_max = 100;
  double varem_tol = 1e-3;
  int varem_max = 1000;
  std::uint64_t seed = 1;
  double a0 = 0.01, b0 = 0.01, c = 1e-5, d = 1e-5;
  int dss_folds = 10;
  std::string dss_rule = "min";
  int threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--engine", engine, "mcem or varem")->check(CLI::IsMember({"mcem", "varem"}));
    app->add_option("--iters", iters, "total Gibbs sweeps");
    app->add_option("--burnin", burnin, "discarded sweeps");
    app->add_option("--em-block", em_block, "sweeps between (a, b) updates");
    app->add_option("--em-tol", em_tol, "EM stopping tolerance on the squared (a, b) change");
    app->add_option("--em-max", em_max, "maximum number of EM updates");
    app->add_option("--varem-tol", varem_tol, "variational ELBO tolerance");
    app->add_option("--varem-max", varem_max, "maximum variational iterations");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--a0", a0, "initial a");
    app->add_option("--b0", b0, "initial b");
    app->add_option("--c", c, "sigma2 prior shape");
    app->add_option("--d", d, "sigma2 prior scale");
    app->add_option("--dss-folds", dss_folds, "cross-validation folds for DSS");
    app->add_option("--dss-rule", dss_rule, "DSS lambda rule: min or 1se")
        ->check(CLI::IsMember({"min", "1se"}));
    app->add_option("--threads", threads, "worker threads (0: all cores)");
  }

  nbp::EngineConfig config() const {
    nbp::EngineConfig cfg;
    cfg.mcem.total_iters = iters;
    cfg.mcem.burn_in = burnin;
    cfg.mcem.em_block = em_block;
    cfg.mcem.em_tol = em_tol;
    cfg.mcem.em_max = em_max;
    cfg.mcem.seed = seed;
    cfg.mcem.a0 = a0;
    cfg.mcem.b0 = b0;
    cfg.varem.tol = varem_tol;
    cfg.varem.max_iters = varem_max;
    cfg.varem.a0 = a0;
    cfg.varem.b0 = b0;
    cfg.c = c;
    cfg.d = d;
    cfg.dss_folds = dss_folds;
    cfg.dss_rule = dss_rule == "1se" ? nbp::CvRule::one_se : nbp::CvRule::min_error;
    cfg.threads = threads;
    cfg.mcem.validate();
    cfg.varem.validate();
    if (!(c > 0.0) || !(d > 0.0)) throw nbp::DomainError("--c and --d must be positive");
    return cfg;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw nbp::DomainError("not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw nbp::DomainError("empty number list");
  return out;
}

void apply_spec_file(const std::string& path, nbp::ExperimentSpec& spec) {
  std::ifstream in(path);
  if (!in) throw nbp::IoError("cannot open spec file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw nbp::IoError("spec file '" + path + "': " + e.what());
  }
  try {
    spec.n = j.value("n", spec.n);
    spec.p = j.value("p", spec.p);
    spec.n_active = j.value("n_active", spec.n_active);
    spec.sigma2_true = j.value("sigma2_true", spec.sigma2_true);
    spec.correlation_rho = j.value("correlation_rho", spec.correlation_rho);
    spec.replications = j.value("replications", spec.replications);
    spec.seed = j.value("seed", spec.seed);
    spec.fixed_support = j.value("fixed_support", spec.fixed_support);
    if (j.contains("engine")) spec.engine = nbp::parse_engine(j["engine"].get<std::string>());
    if (j.contains("signal_law")) {
      const auto& s = j["signal_law"];
      const std::string kind = s.value("kind", std::string("uniform_pm"));
      if (kind == "fixed") {
        spec.signal.kind = nbp::SignalLaw::Kind::fixed;
        spec.signal.value = s.value("value", spec.signal.value);
      } else if (kind == "uniform_pm") {
        spec.signal.kind = nbp::SignalLaw::Kind::uniform_pm;
        spec.signal.lo = s.value("lo", spec.signal.lo);
        spec.signal.hi = s.value("hi", spec.signal.hi);
      } else {
        throw nbp::DomainError("unknown signal_law kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw nbp::DomainError("spec file '" + path + "': " + e.what());
  }
}

int run_fit(const std::string& data_path, const std::string& response, const EngineFlags& flags,
            const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  const nbp::Engine engine = nbp::parse_engine(flags.engine);
  const nbp::Dataset ds = nbp::read_csv_dataset(data_path, response);
  const nbp::RegressionData data = nbp::standardize(ds.x, ds.y);
  const nbp::FitOutput fit = nbp::fit_model(data, engine, flags.config(), flags.seed);
  nbp::write_output(out, nbp::fit_report_json(fit, ds.predictor_names, engine, seconds_since(start)));
  return kOk;
}

int run_mspe(const std::string& data_path, const std::string& response, int folds,
             const EngineFlags& flags, const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  const nbp::Engine engine = nbp::parse_engine(flags.engine);
  const nbp::Dataset ds = nbp::read_csv_dataset(data_path, response);
  const nbp::RegressionData data = nbp::standardize(ds.x, ds.y);
  const nbp::MspeResult r = nbp::cross_validated_mspe(data, folds, engine, flags.config(), flags.seed);
  nbp::write_output(out, nbp::mspe_report_json(r, folds, engine, seconds_since(start)));
  return kOk;
}

std::string probe_csv(const std::vector<double>& as, const std::vector<double>& bs,
                      const std::vector<double>& xs, const std::vector<double>& ks) {
  std::ostringstream o;
  o.precision(17);
  o << "check,a,b,x,value,ref1,ref2,ref3,holds\n";
  for (double a : as) {
    for (double b : bs) {
      const nbp::GammaRatioBounds g = nbp::lemma1_ratio(a, b);
      o << "gamma_ratio," << a << ',' << b << ",," << g.ratio << ',' << g.lower << ',' << g.upper
        << ",," << g.holds << '\n';
      if (b >= 1.0) {
        for (double x : xs) {
          const double fb = nbp::beta_prime_cdf(x, a, b);
          const double f1 = nbp::beta_prime_cdf(x, a, 1.0);
          o << "dominance," << a << ',' << b << ',' << x << ',' << fb << ',' << f1 << ",,,"
            << (fb >= f1 - 1e-12) << '\n';
        }
      }
      if (b > 1.0) {
        for (double k : ks) {
          const nbp::TailBound t = nbp::tail_mass_bound(k, a, b);
          o << "tail," << a << ',' << b << ',' << k << ',' << t.tail << ',' << t.first << ','
            << t.dominated << ',' << t.bound << ',' << t.holds << '\n';
        }
      }
    }
  }
  return o.str();
}

std::vector<double> density_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) {
    throw nbp::DomainError("density grid needs 0 < --from < --to and --points >= 2");
  }
  std::vector<double> pos;
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) pos.push_back(lo * std::exp(step * i));
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.push_back(-*it);
  out.insert(out.end(), pos.begin(), pos.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal-beta prime regression: fitting, simulation and numerical checks"};
  app.require_subcommand(1);

  std::string data_path, response = "y", out;

  auto* fit = app.add_subcommand("fit", "fit a CSV dataset and write a JSON report");
  EngineFlags fit_flags;
  fit->add_option("data", data_path, "CSV file with a header row")->required();
  fit->add_option("--response", response, "name of the response column");
  fit->add_option("--out", out, "output path (default stdout)");
  fit_flags.attach(fit);

  auto* sim = app.add_subcommand("simulate", "run a simulation study");
  EngineFlags sim_flags;
  nbp::ExperimentSpec spec;
  std::string spec_path, csv_out, signal = "uniform";
  sim->add_option("--spec", spec_path, "JSON file with ExperimentSpec fields");
  sim->add_option("--n", spec.n, "observations");
  sim->add_option("--p", spec.p, "predictors");
  sim->add_option("--n-active", spec.n_active, "active predictors");
  sim->add_option("--signal", signal, "uniform or fixed")->check(CLI::IsMember({"uniform", "fixed"}));
  sim->add_option("--signal-value", spec.signal.value, "value of every active coefficient (fixed)");
  sim->add_option("--signal-lo", spec.signal.lo, "smallest |beta| (uniform)");
  sim->add_option("--signal-hi", spec.signal.hi, "largest |beta| (uniform)");
  sim->add_option("--sigma2", spec.sigma2_true, "noise variance");
  sim->add_option("--rho", spec.correlation_rho, "AR correlation of the design");
  sim->add_option("--replications", spec.replications, "number of replications");
  sim->add_flag("--fixed-support", spec.fixed_support, "reuse one active set in every replication");
  sim->add_option("--out", out, "JSON report path (default stdout)");
  sim->add_option("--csv", csv_out, "per-replication CSV path");
  sim_flags.attach(sim);

  auto* mspe = app.add_subcommand("mspe", "cross-validated prediction error on a CSV dataset");
  EngineFlags mspe_flags;
  int folds = 5;
  mspe->add_option("data", data_path, "CSV file with a header row")->required();
  mspe->add_option("--response", response, "name of the response column");
  mspe->add_option("--folds", folds, "number of folds");
  mspe->add_option("--out", out, "output path (default stdout)");
  mspe_flags.attach(mspe);

  auto* probe = app.add_subcommand("probe", "prior inequality checks as CSV");
  std::string probe_a = "0.001,0.01,0.1,0.5,1", probe_b = "1,1.5,2,5";
  std::string probe_x = "0.01,0.1,1,10,100", probe_k = "0.01,0.1,1,10";
  probe->add_option("--a", probe_a, "comma-separated a values");
  probe->add_option("--b", probe_b, "comma-separated b values");
  probe->add_option("--x", probe_x, "CDF grid");
  probe->add_option("--k", probe_k, "tail thresholds");
  probe->add_option("--out", out, "output path (default stdout)");

  auto* density = app.add_subcommand("density", "marginal prior density grid as CSV");
  std::string dens_a = "0.1,0.5,2", dens_b = "0.1,1";
  double sigma2 = 1.0, from = 1e-4, to = 5.0;
  int points = 101;
  density->add_option("--a", dens_a, "comma-separated a values");
  density->add_option("--b", dens_b, "comma-separated b values");
  density->add_option("--sigma2", sigma2, "sigma^2");
  density->add_option("--from", from, "smallest |beta|");
  density->add_option("--to", to, "largest |beta|");
  density->add_option("--points", points, "points per half-line (log-spaced)");
  density->add_option("--out", out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kDomain;
  }

  try {
    if (fit->parsed()) return run_fit(data_path, response, fit_flags, out);
    if (mspe->parsed()) return run_mspe(data_path, response, folds, mspe_flags, out);
    if (sim->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      if (!spec_path.empty()) apply_spec_file(spec_path, spec);
      if (signal == "fixed") spec.signal.kind = nbp::SignalLaw::Kind::fixed;
      if (sim->count("--engine") > 0 || spec_path.empty()) spec.engine = nbp::parse_engine(sim_flags.engine);
      if (sim->count("--seed") > 0 || spec_path.empty()) spec.seed = sim_flags.seed;
      const nbp::MetricsReport report = nbp::run_experiment(spec, sim_flags.config());
      if (!csv_out.empty()) nbp::write_output(csv_out, nbp::experiment_report_csv(report));
      nbp::write_output(out, nbp::experiment_report_json(spec, report, seconds_since(start)));
      return kOk;
    }
    if (probe->parsed()) {
      nbp::write_output(out, probe_csv(parse_list(probe_a), parse_list(probe_b), parse_list(probe_x),
                                       parse_list(probe_k)));
      return kOk;
    }
    if (density->parsed()) {
      const std::vector<double> xs = density_grid(from, to, points);
      std::vector<nbp::MarginalGrid> grids;
      for (double a : parse_list(dens_a)) {
        for (double b : parse_list(dens_b)) grids.push_back(nbp::marginal_grid(xs, a, b, sigma2));
      }
      nbp::write_output(out, nbp::marginal_grid_csv(grids));
      return kOk;
    }
  } catch (const nbp::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const nbp::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const nbp::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
