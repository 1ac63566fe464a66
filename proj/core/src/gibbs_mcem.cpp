#include "nbp/gibbs_mcem.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nbp/errors.hpp"
#include "nbp/specfun.hpp"

namespace nbp {
namespace {

Eigen::VectorXd local_variances(const LatentState& state) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = std::numeric_limits<double>::max();
  return state.lambda2.cwiseProduct(state.xi2).cwiseMax(lo).cwiseMin(hi);
}

void check_finite(double v, const char* what, long sweep_index) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("Gibbs sweep ") + std::to_string(sweep_index) + ": non-finite " +
                       what);
  }
}

}  // namespace

void McemConfig::validate() const {
  if (total_iters < 1) throw DomainError("McemConfig: total_iters must be positive");
  if (burn_in < 0 || burn_in >= total_iters) {
    throw DomainError("McemConfig: burn_in must satisfy 0 <= burn_in < total_iters");
  }
  if (em_block < 1) throw DomainError("McemConfig: em_block must be at least 1");
  if (!(em_tol > 0.0)) throw DomainError("McemConfig: em_tol must be positive");
  if (em_max < 0) throw DomainError("McemConfig: em_max must be non-negative");
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw DomainError("McemConfig: a0 and b0 must be positive");
}

SigmaConditional sigma2_conditional(const RegressionData& data, const Eigen::VectorXd& beta,
                                    const Eigen::VectorXd& d_scale, const NbpHyperparams& hyper) {
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  const double rss = (data.y - data.x * beta).squaredNorm();
  const double penalty = beta.array().square().cwiseQuotient(d_scale.array()).sum();
  return {(n + p + 2.0 * hyper.c) / 2.0, (rss + penalty + 2.0 * hyper.d) / 2.0};
}

GibbsSampler::GibbsSampler(const RegressionData& data) : data_(data), beta_sampler_(data.x, data.y) {}

LatentState GibbsSampler::sweep(const LatentState& state, const NbpHyperparams& hyper,
                                RngStream& rng, long sweep_index) const {
  const Eigen::Index p = data_.p();
  LatentState next = state;

  next.beta = beta_sampler_.draw(DiagScale(local_variances(state)), state.sigma2, rng);

  const double lambda_order = hyper.a - 0.5;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double b2 = next.beta[i] * next.beta[i];
    const double chi = b2 / (next.sigma2 * next.xi2[i]);
    check_finite(chi, "lambda2 chi", sweep_index);
    next.lambda2[i] = sample_gig({chi, 2.0, lambda_order}, rng);
  }

  const double xi_shape = hyper.b + 0.5;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double b2 = next.beta[i] * next.beta[i];
    const double rate = b2 / (2.0 * next.sigma2 * next.lambda2[i]) + 1.0;
    check_finite(rate, "xi2 rate", sweep_index);
    next.xi2[i] = sample_inverse_gamma(xi_shape, rate, rng);
  }

  const SigmaConditional sc = sigma2_conditional(data_, next.beta, local_variances(next), hyper);
  check_finite(sc.scale, "sigma2 scale", sweep_index);
  next.sigma2 = sample_inverse_gamma(sc.shape, sc.scale, rng);
  return next;
}

LatentState gibbs_sweep(const LatentState& state, const RegressionData& data,
                        const NbpHyperparams& hyper, RngStream& rng) {
  state.validate();
  hyper.validate();
  return GibbsSampler(data).sweep(state, hyper, rng);
}

std::pair<double, double> em_update(const Eigen::VectorXd& log_lambda2_means,
                                    const Eigen::VectorXd& log_xi2_means) {
  if (log_lambda2_means.size() == 0 || log_xi2_means.size() == 0) {
    throw DomainError("em_update: empty input");
  }
  if (!log_lambda2_means.allFinite() || !log_xi2_means.allFinite()) {
    throw DomainError("em_update: non-finite input");
  }
  const double a = specfun::inverse_digamma(log_lambda2_means.mean());
  const double b = specfun::inverse_digamma(-log_xi2_means.mean());
  return {a, b};
}

LatentState initial_state(const RegressionData& data) {
  const Eigen::Index p = data.p();
  LatentState s;
  s.beta = Eigen::VectorXd::Zero(p);
  s.lambda2 = Eigen::VectorXd::Ones(p);
  s.xi2 = Eigen::VectorXd::Ones(p);
  const double n = static_cast<double>(data.n());
  const double centered = (data.y.array() - data.y.mean()).square().sum();
  const double var = n > 1.0 ? centered / (n - 1.0) : 1.0;
  if (!std::isfinite(var)) throw NumericError("initial state: variance of y is not finite");
  s.sigma2 = var > 0.0 ? var : 1.0;
  return s;
}

PosteriorSummary run_mcem(const RegressionData& data, const McemConfig& config,
                          const NbpHyperparams& hyper_init) {
  config.validate();
  hyper_init.validate();
  const Eigen::Index p = data.p();
  if (p < 1 || data.n() < 1) throw DomainError("run_mcem: empty data");

  const GibbsSampler sampler(data);
  RngStream rng(config.seed);
  NbpHyperparams hyper = hyper_init;
  LatentState state = initial_state(data);

  PosteriorSummary out;
  out.em_trace.emplace_back(hyper.a, hyper.b);
  const int retained = config.total_iters - config.burn_in;
  out.samples.resize(retained, p);
  out.sigma2_samples.resize(retained);

  bool em_active = config.em_max > 0;
  int em_steps = 0;
  int block_fill = 0;
  Eigen::VectorXd sum_log_lambda2 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sum_log_xi2 = Eigen::VectorXd::Zero(p);

  for (int t = 1; t <= config.total_iters; ++t) {
    state = sampler.sweep(state, hyper, rng, t);

    if (em_active) {
      sum_log_lambda2.array() += state.lambda2.array().log();
      sum_log_xi2.array() += state.xi2.array().log();
      if (++block_fill == config.em_block) {
        const double m = static_cast<double>(config.em_block);
        std::pair<double, double> ab;
        try {
          ab = em_update(sum_log_lambda2 / m, sum_log_xi2 / m);
        } catch (const std::exception& e) {
          throw NumericError("EM update at sweep " + std::to_string(t) + ": " + e.what());
        }
        const double dif = (ab.first - hyper.a) * (ab.first - hyper.a) +
                           (ab.second - hyper.b) * (ab.second - hyper.b);
        hyper.a = ab.first;
        hyper.b = ab.second;
        out.em_trace.push_back(ab);
        ++em_steps;
        block_fill = 0;
        sum_log_lambda2.setZero();
        sum_log_xi2.setZero();
        if (dif < config.em_tol || em_steps >= config.em_max) em_active = false;
      }
    }

    if (t > config.burn_in) {
      const int row = t - config.burn_in - 1;
      out.samples.row(row) = state.beta.transpose();
      out.sigma2_samples[row] = state.sigma2;
    }
  }

  out.a_hat = hyper.a;
  out.b_hat = hyper.b;
  summarize_draws(out);
  return out;
}

PosteriorSummary run_mcem(const RegressionData& data, const McemConfig& config) {
  NbpHyperparams hyper;
  hyper.a = config.a0;
  hyper.b = config.b0;
  return run_mcem(data, config, hyper);
}

}  // namespace nbp
