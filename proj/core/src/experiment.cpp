#include "nbp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "nbp/errors.hpp"
#include "nbp/rand_dist.hpp"

namespace nbp {
namespace {

constexpr std::uint64_t kFixedSupportStream = 0xffffffffffffffffULL;

std::vector<Eigen::Index> sample_without_replacement(int p, int k, RngStream& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (int i = 0; i < k; ++i) {
    const auto span = static_cast<std::uint64_t>(p - i);
    const auto j = i + static_cast<int>(rng.next_u64() % span);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::uint64_t replication_fit_seed(std::uint64_t seed, int replication) {
  return RngStream(seed, static_cast<std::uint64_t>(replication)).substream(2).next_u64();
}

MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  if (v.empty()) return s;
  const double m = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (m - 1.0) / m);
  }
  return s;
}

RegressionData subset_rows(const RegressionData& data, const std::vector<Eigen::Index>& rows) {
  RegressionData out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), data.p());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = data.x.row(rows[r]);
    out.y[static_cast<Eigen::Index>(r)] = data.y[rows[r]];
  }
  return out;
}

}  // namespace

const char* engine_name(Engine engine) { return engine == Engine::mcem ? "mcem" : "varem"; }

Engine parse_engine(const std::string& name) {
  if (name == "mcem") return Engine::mcem;
  if (name == "varem" || name == "var_em") return Engine::varem;
  throw DomainError("unknown engine '" + name + "' (expected mcem or varem)");
}

void ExperimentSpec::validate() const {
  if (n < 2 || p < 1) throw DomainError("ExperimentSpec: need n >= 2 and p >= 1");
  if (n_active < 0 || n_active > p) throw DomainError("ExperimentSpec: need 0 <= n_active <= p");
  if (!(sigma2_true > 0.0) || !std::isfinite(sigma2_true)) {
    throw DomainError("ExperimentSpec: sigma2_true must be positive");
  }
  if (!(std::abs(correlation_rho) < 1.0)) throw DomainError("ExperimentSpec: |rho| must be below 1");
  if (replications < 1) throw DomainError("ExperimentSpec: replications must be positive");
  if (signal.kind == SignalLaw::Kind::uniform_pm && !(0.0 <= signal.lo && signal.lo <= signal.hi)) {
    throw DomainError("ExperimentSpec: uniform signal law needs 0 <= lo <= hi");
  }
  if (!std::isfinite(signal.value)) throw DomainError("ExperimentSpec: fixed signal must be finite");
}

SimulatedData gen_experiment(const ExperimentSpec& spec, int replication) {
  spec.validate();
  if (replication < 0) throw DomainError("gen_experiment: negative replication index");
  const RngStream base(spec.seed, static_cast<std::uint64_t>(replication));
  RngStream support_rng = spec.fixed_support ? RngStream(spec.seed, kFixedSupportStream) : base.substream(0);
  RngStream rng = base.substream(1);

  SimulatedData out;
  out.true_support = sample_without_replacement(spec.p, spec.n_active, support_rng);
  out.true_beta = Eigen::VectorXd::Zero(spec.p);
  for (Eigen::Index j : out.true_support) {
    if (spec.signal.kind == SignalLaw::Kind::fixed) {
      out.true_beta[j] = spec.signal.value;
    } else {
      const double mag = spec.signal.lo + (spec.signal.hi - spec.signal.lo) * rng.uniform();
      out.true_beta[j] = rng.uniform() < 0.5 ? -mag : mag;
    }
  }

  // AR(1) recursion reproduces Gamma_ij = rho^|i-j| row by row.
  const double rho = spec.correlation_rho;
  const double innov = std::sqrt(1.0 - rho * rho);
  Eigen::MatrixXd raw(spec.n, spec.p);
  for (int i = 0; i < spec.n; ++i) {
    double prev = rng.normal();
    raw(i, 0) = prev;
    for (int j = 1; j < spec.p; ++j) {
      prev = rho * prev + innov * rng.normal();
      raw(i, j) = prev;
    }
  }
  out.data = standardize(raw, Eigen::VectorXd::Zero(spec.n));

  const double sigma = std::sqrt(spec.sigma2_true);
  Eigen::VectorXd y = out.data.x * out.true_beta;
  for (int i = 0; i < spec.n; ++i) y[i] += sigma * rng.normal();
  out.data.y_mean = y.mean();
  out.data.y = y.array() - out.data.y_mean;
  return out;
}

MetricsRow compute_metrics(const Eigen::VectorXd& beta_hat, const std::vector<Eigen::Index>& selected,
                           const Eigen::VectorXd& true_beta,
                           const std::vector<Eigen::Index>& true_support) {
  const Eigen::Index p = true_beta.size();
  if (beta_hat.size() != p) throw DomainError("compute_metrics: dimension mismatch");
  std::vector<char> is_true(static_cast<std::size_t>(p), 0), is_sel(static_cast<std::size_t>(p), 0);
  for (Eigen::Index j : true_support) {
    if (j < 0 || j >= p) throw DomainError("compute_metrics: support index out of range");
    is_true[static_cast<std::size_t>(j)] = 1;
  }
  for (Eigen::Index j : selected) {
    if (j < 0 || j >= p) throw DomainError("compute_metrics: selected index out of range");
    is_sel[static_cast<std::size_t>(j)] = 1;
  }
  MetricsRow row;
  for (std::size_t j = 0; j < is_true.size(); ++j) {
    if (is_sel[j] && is_true[j]) ++row.tp;
    else if (is_sel[j]) ++row.fp;
    else if (is_true[j]) ++row.fn;
    else ++row.tn;
  }
  const double pd = static_cast<double>(p);
  row.mse = (beta_hat - true_beta).squaredNorm() / pd;
  row.fdr = row.tp + row.fp == 0 ? 0.0 : static_cast<double>(row.fp) / (row.tp + row.fp);
  row.fnr = row.tn + row.fn == 0 ? 0.0 : static_cast<double>(row.fn) / (row.tn + row.fn);
  row.mp = static_cast<double>(row.fp + row.fn) / pd;
  return row;
}

MetricsReport aggregate(std::vector<MetricsRow> rows) {
  MetricsReport report;
  std::sort(rows.begin(), rows.end(),
            [](const MetricsRow& l, const MetricsRow& r) { return l.replication < r.replication; });
  std::vector<double> mse, fdr, fnr, mp, a, b;
  for (const MetricsRow& r : rows) {
    mse.push_back(r.mse);
    fdr.push_back(r.fdr);
    fnr.push_back(r.fnr);
    mp.push_back(r.mp);
    a.push_back(r.a_hat);
    b.push_back(r.b_hat);
  }
  report.mse = summarize(mse);
  report.fdr = summarize(fdr);
  report.fnr = summarize(fnr);
  report.mp = summarize(mp);
  report.a_hat = summarize(a);
  report.b_hat = summarize(b);
  report.rows = std::move(rows);
  return report;
}

FitOutput fit_model(const RegressionData& data, Engine engine, const EngineConfig& config,
                    std::uint64_t seed) {
  FitOutput out;
  if (engine == Engine::mcem) {
    McemConfig mc = config.mcem;
    mc.seed = seed;
    NbpHyperparams hyper{mc.a0, mc.b0, config.c, config.d};
    out.summary = run_mcem(data, mc, hyper);
  } else {
    NbpHyperparams hyper{config.varem.a0, config.varem.b0, config.c, config.d};
    out.summary = to_posterior_summary(run_var_em(data, config.varem, hyper));
  }
  RngStream dss_rng(seed, 1);
  out.dss = dss_select(data.x, out.summary.beta_mean, config.dss_folds, dss_rng, config.dss_rule);
  return out;
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

MetricsReport run_experiment(const ExperimentSpec& spec, const EngineConfig& config) {
  spec.validate();
  const int reps = spec.replications;
  std::vector<MetricsRow> rows(static_cast<std::size_t>(reps));
  std::vector<std::string> errors(static_cast<std::size_t>(reps));
  std::vector<char> ok(static_cast<std::size_t>(reps), 0);

  parallel_for(reps, config.threads, [&](int r) {
    const auto slot = static_cast<std::size_t>(r);
    try {
      const SimulatedData sim = gen_experiment(spec, r);
      const FitOutput fit = fit_model(sim.data, spec.engine, config, replication_fit_seed(spec.seed, r));
      MetricsRow row = compute_metrics(fit.summary.beta_median, fit.dss.support, sim.true_beta,
                                       sim.true_support);
      row.replication = r;
      row.a_hat = fit.summary.a_hat;
      row.b_hat = fit.summary.b_hat;
      rows[slot] = row;
      ok[slot] = 1;
    } catch (const std::exception& e) {
      errors[slot] = e.what();
    }
  });

  std::vector<MetricsRow> good;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (ok[r]) good.push_back(rows[r]);
  }
  MetricsReport report = aggregate(std::move(good));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!ok[r]) {
      ++report.failures;
      report.failure_messages.push_back("replication " + std::to_string(r) + ": " + errors[r]);
    }
  }
  return report;
}

MspeResult cross_validated_mspe(const RegressionData& data, int folds, Engine engine,
                                const EngineConfig& config, std::uint64_t seed) {
  const Eigen::Index n = data.n();
  if (folds < 2) throw DomainError("cross_validated_mspe: need at least two folds");
  if (n < folds) throw DomainError("cross_validated_mspe: fewer rows than folds");

  RngStream rng(seed, 3);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  std::vector<std::vector<Eigen::Index>> train(static_cast<std::size_t>(folds)),
      test(static_cast<std::size_t>(folds));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto f = static_cast<std::size_t>(k % folds);
    for (std::size_t g = 0; g < train.size(); ++g) {
      (g == f ? test[g] : train[g]).push_back(perm[static_cast<std::size_t>(k)]);
    }
  }
  for (int f = 0; f < folds; ++f) {
    if (test[static_cast<std::size_t>(f)].size() < 2 || train[static_cast<std::size_t>(f)].size() < 2) {
      throw DomainError("cross_validated_mspe: fold " + std::to_string(f) + " has fewer than two rows");
    }
  }

  MspeResult out;
  out.fold_mse.assign(static_cast<std::size_t>(folds), 0.0);
  parallel_for(folds, config.threads, [&](int f) {
    const auto slot = static_cast<std::size_t>(f);
    auto tr = train[slot], te = test[slot];
    std::sort(tr.begin(), tr.end());
    std::sort(te.begin(), te.end());
    RegressionData fit_data = subset_rows(data, tr);
    // The model has no intercept, so both sides are centered on the training rows.
    const double y_center = fit_data.y.mean();
    const Eigen::RowVectorXd x_center = fit_data.x.colwise().mean();
    fit_data.y.array() -= y_center;
    fit_data.x.rowwise() -= x_center;
    McemConfig mc = config.mcem;
    mc.seed = RngStream(seed, 4).substream(slot).next_u64();
    PosteriorSummary summary;
    if (engine == Engine::mcem) {
      summary = run_mcem(fit_data, mc, NbpHyperparams{mc.a0, mc.b0, config.c, config.d});
    } else {
      summary = to_posterior_summary(run_var_em(
          fit_data, config.varem, NbpHyperparams{config.varem.a0, config.varem.b0, config.c, config.d}));
    }
    const RegressionData held = subset_rows(data, te);
    const Eigen::VectorXd pred = (held.x.rowwise() - x_center) * summary.beta_median;
    const Eigen::VectorXd resid = held.y.array() - y_center - pred.array();
    out.fold_mse[slot] = resid.squaredNorm() / static_cast<double>(te.size());
  });
  out.mspe = std::accumulate(out.fold_mse.begin(), out.fold_mse.end(), 0.0) / folds;
  return out;
}

}  // namespace nbp
