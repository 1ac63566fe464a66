#include "nbp/linalg_sampler.hpp"

#include <cmath>
#include <string>

#include "nbp/errors.hpp"

namespace nbp {
namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

Eigen::VectorXd standard_normals(Eigen::Index n, RngStream& rng) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  return z;
}

// I_n + X D X', computed as a rank update with X diag(sqrt d).
Eigen::MatrixXd woodbury_core(const Eigen::MatrixXd& x, const Eigen::VectorXd& d) {
  const Eigen::MatrixXd xs = x * d.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(x.rows(), x.rows());
  m.selfadjointView<Eigen::Lower>().rankUpdate(xs);
  return m.selfadjointView<Eigen::Lower>();
}

}  // namespace

DiagScale::DiagScale(Eigen::VectorXd d) : d_(std::move(d)) {
  for (Eigen::Index i = 0; i < d_.size(); ++i) {
    if (!(d_[i] > 0.0) || !std::isfinite(d_[i])) {
      throw DomainError("DiagScale: entry " + std::to_string(i) +
                        " must be positive and finite, got " + std::to_string(d_[i]));
    }
  }
}

Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  const double dim = static_cast<double>(a.rows());
  double jitter = 1e-10 * std::abs(a.trace()) / dim;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 10.0;
  }
  throw NumericError("Cholesky factorization failed after jitter escalation");
}

BetaSampler::BetaSampler(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) : x_(x), y_(y) {
  if (x.rows() < 1 || x.cols() < 1) throw DomainError("BetaSampler: empty design matrix");
  if (y.size() != x.rows()) throw DomainError("BetaSampler: response length does not match X");
  if (!all_finite(x) || !y.allFinite()) throw DomainError("BetaSampler: non-finite data");
  xtx_ = Eigen::MatrixXd(x.cols(), x.cols());
  xtx_.setZero();
  xtx_.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  xtx_ = xtx_.selfadjointView<Eigen::Lower>();
  xty_ = x.transpose() * y;
}

BetaRoute BetaSampler::preferred_route() const {
  return p() > 2 * n() ? BetaRoute::fast : BetaRoute::direct;
}

Eigen::VectorXd BetaSampler::draw(const DiagScale& d, double sigma2, RngStream& rng,
                                  BetaRoute route) const {
  if (d.size() != p()) throw DomainError("BetaSampler: DiagScale length does not match X");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw DomainError("BetaSampler: sigma2 must be positive and finite");
  }
  if (route == BetaRoute::automatic) route = preferred_route();
  Eigen::VectorXd beta = route == BetaRoute::fast ? draw_fast(d, sigma2, rng)
                                                  : draw_direct(d, sigma2, rng);
  if (!beta.allFinite()) throw NumericError("BetaSampler: non-finite draw");
  return beta;
}

Eigen::VectorXd BetaSampler::draw_direct(const DiagScale& d, double sigma2, RngStream& rng) const {
  Eigen::MatrixXd a = xtx_;
  a.diagonal() += d.values().cwiseInverse();
  const auto llt = robust_cholesky(a);
  Eigen::VectorXd beta = llt.solve(xty_);
  const Eigen::VectorXd z = standard_normals(p(), rng);
  beta += std::sqrt(sigma2) * llt.matrixU().solve(z);
  return beta;
}

Eigen::VectorXd BetaSampler::draw_fast(const DiagScale& d, double sigma2, RngStream& rng) const {
  const double sigma = std::sqrt(sigma2);
  const Eigen::VectorXd& dv = d.values();
  Eigen::VectorXd u = standard_normals(p(), rng);
  u.array() *= sigma * dv.array().sqrt();
  const Eigen::VectorXd delta = standard_normals(n(), rng);
  const Eigen::VectorXd v = x_ * u / sigma + delta;
  const auto llt = robust_cholesky(woodbury_core(x_, dv));
  const Eigen::VectorXd w = llt.solve(y_ / sigma - v);
  Eigen::VectorXd xtw = x_.transpose() * w;
  return u + sigma * dv.cwiseProduct(xtw);
}

Eigen::VectorXd BetaSampler::conditional_mean(const DiagScale& d) const {
  if (preferred_route() == BetaRoute::fast) return smw_solve(x_, d, xty_);
  Eigen::MatrixXd a = xtx_;
  a.diagonal() += d.values().cwiseInverse();
  return robust_cholesky(a).solve(xty_);
}

Eigen::VectorXd sample_conditional_beta(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const DiagScale& d, double sigma2, RngStream& rng,
                                        BetaRoute route) {
  return BetaSampler(x, y).draw(d, sigma2, rng, route);
}

Eigen::MatrixXd smw_solve(const Eigen::MatrixXd& x, const DiagScale& d, const Eigen::MatrixXd& b) {
  if (d.size() != x.cols() || b.rows() != x.cols()) {
    throw DomainError("smw_solve: dimension mismatch");
  }
  const Eigen::VectorXd& dv = d.values();
  const Eigen::MatrixXd db = dv.asDiagonal() * b;
  Eigen::LLT<Eigen::MatrixXd> llt(woodbury_core(x, dv));
  if (llt.info() != Eigen::Success) throw NumericError("smw_solve: I + X D X' is not positive definite");
  const Eigen::MatrixXd inner = llt.solve(x * db);
  return db - dv.asDiagonal() * (x.transpose() * inner);
}

double log_det_precision(const Eigen::MatrixXd& x, const DiagScale& d) {
  const Eigen::VectorXd& dv = d.values();
  Eigen::LLT<Eigen::MatrixXd> llt(woodbury_core(x, dv));
  if (llt.info() != Eigen::Success) throw NumericError("log_det_precision: factorization failed");
  const double log_det_core =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return log_det_core - dv.array().log().sum();
}

}  // namespace nbp
