#include "nbp/var_em.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nbp/errors.hpp"
#include "nbp/linalg_sampler.hpp"
#include "nbp/rand_dist.hpp"
#include "nbp/specfun.hpp"

namespace nbp {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kScaleFloor = 1e-300;
constexpr double kScaleCeil = 1e300;

double clamp_scale(double x) { return std::clamp(x, kScaleFloor, kScaleCeil); }

void require_finite(double v, const char* term) {
  if (!std::isfinite(v)) throw NumericError(std::string("ELBO term not finite: ") + term);
}

Eigen::VectorXd precision_diagonal(const VariationalMoments& mom) {
  return mom.inv_lambda2.cwiseProduct(mom.inv_xi2).unaryExpr(&clamp_scale);
}

// log det of a symmetric positive definite matrix after unit-diagonal scaling,
// which keeps the factorization stable when variances span many decades.
double log_det_spd(const Eigen::MatrixXd& s) {
  const Eigen::VectorXd diag = s.diagonal();
  if ((diag.array() <= 0.0).any()) throw NumericError("Sigma_star has a non-positive diagonal");
  const Eigen::VectorXd inv_sd = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd corr = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) throw NumericError("Sigma_star is not positive definite");
  return diag.array().log().sum() + 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double trace_xtx_sigma(const Eigen::MatrixXd& x, const Eigen::MatrixXd& sigma) {
  return (x * sigma).cwiseProduct(x).sum();
}

}  // namespace

void VariationalParams::validate() const {
  const Eigen::Index p = beta_star.size();
  if (Sigma_star.rows() != p || Sigma_star.cols() != p || k_star.size() != p ||
      v_star.size() != p) {
    throw DomainError("VariationalParams: dimension mismatch");
  }
  if (!beta_star.allFinite() || !Sigma_star.allFinite()) {
    throw NumericError("VariationalParams: non-finite q1 parameters");
  }
  if ((k_star.array() <= 0.0).any() || !k_star.allFinite() || (v_star.array() <= 0.0).any() ||
      !v_star.allFinite()) {
    throw NumericError("VariationalParams: k_star and v_star must be positive and finite");
  }
  if (!(u_star > 0.0) || !(c_star > 0.0) || !(d_star > 0.0) || !std::isfinite(d_star) ||
      !std::isfinite(m_star) || !(l_star > 0.0)) {
    throw NumericError("VariationalParams: invalid scalar parameters");
  }
}

VariationalMoments variational_moments(const VariationalParams& params) {
  const Eigen::Index p = params.beta_star.size();
  VariationalMoments mom;
  mom.lambda2_mean.resize(p);
  mom.inv_lambda2.resize(p);
  mom.log_lambda2.resize(p);
  mom.inv_xi2.resize(p);
  mom.log_xi2.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const GigMoments g = gig_expectations({params.k_star[i], params.l_star, params.m_star});
    mom.lambda2_mean[i] = g.mean;
    mom.inv_lambda2[i] = g.inverse_mean;
    mom.log_lambda2[i] = g.log_mean;
    const InverseGammaMoments ig = inverse_gamma_expectations(params.u_star, params.v_star[i]);
    mom.inv_xi2[i] = ig.inverse_mean;
    mom.log_xi2[i] = ig.log_mean;
  }
  const InverseGammaMoments s = inverse_gamma_expectations(params.c_star, params.d_star);
  mom.inv_sigma2 = s.inverse_mean;
  mom.log_sigma2 = s.log_mean;
  return mom;
}

VariationalParams initial_variational_params(const RegressionData& data,
                                             const NbpHyperparams& hyper, double d_star0,
                                             double k_star0, double v_star0) {
  hyper.validate();
  if (!(d_star0 > 0.0) || !(k_star0 > 0.0) || !(v_star0 > 0.0)) {
    throw DomainError("variational initial values must be positive");
  }
  const Eigen::Index p = data.p();
  VariationalParams q;
  q.beta_star = Eigen::VectorXd::Zero(p);
  q.Sigma_star = Eigen::MatrixXd::Identity(p, p);
  q.k_star = Eigen::VectorXd::Constant(p, k_star0);
  q.v_star = Eigen::VectorXd::Constant(p, v_star0);
  q.l_star = 2.0;
  q.m_star = hyper.a - 0.5;
  q.u_star = hyper.b + 0.5;
  q.c_star = (static_cast<double>(data.n()) + static_cast<double>(p) + 2.0 * hyper.c) / 2.0;
  q.d_star = d_star0;
  return q;
}

VariationalParams cavi_step(const VariationalParams& params, const RegressionData& data,
                            const NbpHyperparams& hyper) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  if (params.beta_star.size() != p) throw DomainError("cavi_step: dimension mismatch");
  const Eigen::MatrixXd& x = data.x;
  VariationalParams q = params;

  // q1
  const VariationalMoments mom = variational_moments(q);
  const Eigen::VectorXd dstar = precision_diagonal(mom);
  Eigen::MatrixXd phi;
  if (p > 2 * n) {
    const DiagScale prior_var(dstar.cwiseInverse().unaryExpr(&clamp_scale));
    phi = smw_solve(x, prior_var, Eigen::MatrixXd::Identity(p, p));
    phi = 0.5 * (phi + phi.transpose()).eval();
  } else {
    Eigen::MatrixXd a(p, p);
    a.setZero();
    a.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    a = a.selfadjointView<Eigen::Lower>();
    a.diagonal() += dstar;
    phi = robust_cholesky(a).solve(Eigen::MatrixXd::Identity(p, p));
  }
  q.beta_star = phi * (x.transpose() * data.y);
  q.Sigma_star = (1.0 / mom.inv_sigma2) * phi;
  if (!q.beta_star.allFinite() || !q.Sigma_star.allFinite()) {
    throw NumericError("cavi_step: non-finite q1 update");
  }

  const Eigen::VectorXd eb2 = q.beta_star.array().square() + q.Sigma_star.diagonal().array();

  // q2
  q.m_star = hyper.a - 0.5;
  for (Eigen::Index i = 0; i < p; ++i) {
    q.k_star[i] = clamp_scale(eb2[i] * mom.inv_sigma2 * mom.inv_xi2[i]);
  }

  // q3 uses the refreshed q2
  Eigen::VectorXd inv_lambda2(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    inv_lambda2[i] = gig_expectations({q.k_star[i], q.l_star, q.m_star}).inverse_mean;
  }
  q.u_star = hyper.b + 0.5;
  for (Eigen::Index i = 0; i < p; ++i) {
    q.v_star[i] = 0.5 * eb2[i] * mom.inv_sigma2 * inv_lambda2[i] + 1.0;
  }

  // q4 with D* from the refreshed q2 and q3
  Eigen::VectorXd dnew(p);
  for (Eigen::Index i = 0; i < p; ++i) dnew[i] = clamp_scale(inv_lambda2[i] * q.u_star / q.v_star[i]);
  const double fit = (data.y - x * q.beta_star).squaredNorm() + trace_xtx_sigma(x, q.Sigma_star);
  const double penalty = eb2.dot(dnew);
  q.c_star = (static_cast<double>(n) + static_cast<double>(p) + 2.0 * hyper.c) / 2.0;
  q.d_star = (fit + penalty + 2.0 * hyper.d) / 2.0;
  if (!std::isfinite(q.d_star) || !(q.d_star > 0.0)) throw NumericError("cavi_step: invalid d_star");
  return q;
}

double elbo(const VariationalParams& params, const RegressionData& data,
            const NbpHyperparams& hyper) {
  params.validate();
  const double n = static_cast<double>(data.n());
  const Eigen::Index p_idx = data.p();
  const double p = static_cast<double>(p_idx);
  const VariationalMoments mom = variational_moments(params);
  const double a = hyper.a, b = hyper.b, c = hyper.c, d = hyper.d;
  const double m = params.m_star, l = params.l_star, u = params.u_star;

  const Eigen::VectorXd eb2 =
      params.beta_star.array().square() + params.Sigma_star.diagonal().array();

  const double fit = (data.y - data.x * params.beta_star).squaredNorm() +
                     trace_xtx_sigma(data.x, params.Sigma_star);
  const double log_lik = -0.5 * n * kLog2Pi - 0.5 * n * mom.log_sigma2 - 0.5 * mom.inv_sigma2 * fit;
  require_finite(log_lik, "likelihood");

  double quad = 0.0;
  for (Eigen::Index i = 0; i < p_idx; ++i) quad += eb2[i] * mom.inv_lambda2[i] * mom.inv_xi2[i];
  const double log_beta = -0.5 * p * kLog2Pi - 0.5 * p * mom.log_sigma2 -
                          0.5 * mom.log_lambda2.sum() - 0.5 * mom.log_xi2.sum() -
                          0.5 * mom.inv_sigma2 * quad;
  require_finite(log_beta, "beta prior");

  const double log_lambda = (a - 1.0) * mom.log_lambda2.sum() - mom.lambda2_mean.sum() -
                            p * specfun::log_gamma(a);
  require_finite(log_lambda, "lambda2 prior");

  const double log_xi = -p * specfun::log_gamma(b) - (b + 1.0) * mom.log_xi2.sum() - mom.inv_xi2.sum();
  require_finite(log_xi, "xi2 prior");

  const double log_sigma = c * std::log(d) - specfun::log_gamma(c) - (c + 1.0) * mom.log_sigma2 -
                           d * mom.inv_sigma2;
  require_finite(log_sigma, "sigma2 prior");

  const double h_beta = 0.5 * p * (1.0 + kLog2Pi) + 0.5 * log_det_spd(params.Sigma_star);
  require_finite(h_beta, "q1 entropy");

  double h_lambda = 0.0;
  for (Eigen::Index i = 0; i < p_idx; ++i) {
    const double k = params.k_star[i];
    h_lambda += -0.5 * m * std::log(l / k) + std::numbers::ln2 +
                specfun::log_bessel_k(m, std::sqrt(k * l)) - (m - 1.0) * mom.log_lambda2[i] +
                0.5 * (k * mom.inv_lambda2[i] + l * mom.lambda2_mean[i]);
  }
  require_finite(h_lambda, "q2 entropy");

  double h_xi = 0.0;
  const double lg_u = specfun::log_gamma(u);
  for (Eigen::Index i = 0; i < p_idx; ++i) {
    h_xi += -u * std::log(params.v_star[i]) + lg_u + (u + 1.0) * mom.log_xi2[i] + u;
  }
  require_finite(h_xi, "q3 entropy");

  const double cs = params.c_star;
  const double h_sigma = -cs * std::log(params.d_star) + specfun::log_gamma(cs) +
                         (cs + 1.0) * mom.log_sigma2 + cs;
  require_finite(h_sigma, "q4 entropy");

  return log_lik + log_beta + log_lambda + log_xi + log_sigma + h_beta + h_lambda + h_xi + h_sigma;
}

std::pair<double, double> variational_em_update(const VariationalParams& params) {
  const VariationalMoments mom = variational_moments(params);
  const double a = specfun::inverse_digamma(mom.log_lambda2.mean());
  const double b = specfun::inverse_digamma(-mom.log_xi2.mean());
  return {a, b};
}

void VarEmConfig::validate() const {
  if (!(tol > 0.0)) throw DomainError("VarEmConfig: tol must be positive");
  if (max_iters < 1) throw DomainError("VarEmConfig: max_iters must be positive");
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw DomainError("VarEmConfig: a0 and b0 must be positive");
  if (!(d_star0 > 0.0) || !(k_star0 > 0.0) || !(v_star0 > 0.0)) {
    throw DomainError("VarEmConfig: initial values must be positive");
  }
}

VarEmResult run_var_em(const RegressionData& data, const VarEmConfig& config,
                       const NbpHyperparams& hyper_init) {
  config.validate();
  hyper_init.validate();
  if (data.p() < 1 || data.n() < 1) throw DomainError("run_var_em: empty data");

  NbpHyperparams hyper = hyper_init;
  VarEmResult out;
  out.params = initial_variational_params(data, hyper, config.d_star0, config.k_star0,
                                          config.v_star0);
  out.elbo_trace.push_back(elbo(out.params, data, hyper));
  out.ab_trace.emplace_back(hyper.a, hyper.b);

  constexpr int kMaxDecreases = 1000;
  int decreases = 0;
  for (int t = 1; t <= config.max_iters; ++t) {
    out.params = cavi_step(out.params, data, hyper);
    const auto [a, b] = variational_em_update(out.params);
    hyper.a = a;
    hyper.b = b;
    out.ab_trace.emplace_back(a, b);
    const double current = elbo(out.params, data, hyper);
    const double previous = out.elbo_trace.back();
    out.elbo_trace.push_back(current);
    out.iterations = t;

    if (current < previous - 1e-8 * std::abs(previous)) {
      if (++decreases >= kMaxDecreases) throw NumericError("run_var_em: ELBO diverging");
    } else {
      decreases = 0;
    }
    if (std::abs(current - previous) < config.tol) {
      out.converged = true;
      break;
    }
  }
  out.a_hat = hyper.a;
  out.b_hat = hyper.b;
  return out;
}

VarEmResult run_var_em(const RegressionData& data, const VarEmConfig& config) {
  NbpHyperparams hyper;
  hyper.a = config.a0;
  hyper.b = config.b0;
  return run_var_em(data, config, hyper);
}

PosteriorSummary to_posterior_summary(const VarEmResult& result) {
  constexpr double z975 = 1.959963984540054;
  const VariationalParams& q = result.params;
  PosteriorSummary s;
  s.beta_mean = q.beta_star;
  s.beta_median = q.beta_star;
  const Eigen::VectorXd sd = q.Sigma_star.diagonal().cwiseMax(0.0).cwiseSqrt();
  s.credible_lower = q.beta_star - z975 * sd;
  s.credible_upper = q.beta_star + z975 * sd;
  s.a_hat = result.a_hat;
  s.b_hat = result.b_hat;
  s.em_trace = result.ab_trace;
  return s;
}

}  // namespace nbp
