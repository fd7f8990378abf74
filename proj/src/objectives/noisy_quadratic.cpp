#include <cmath>
#include <string>

#include "adascale/errors.hpp"
#include "adascale/kernels/kernels.hpp"
#include "adascale/objectives.hpp"

namespace adascale {

namespace {

void require_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(what) + " must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError(std::string(what) + " must be symmetric");
}

}  // namespace

NoisyQuadratic::NoisyQuadratic(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma,
                               ParamVector w_star, ParamVector w0, double nu)
    : dim_(static_cast<std::size_t>(A.rows())),
      w_star_(std::move(w_star)),
      w0_(std::move(w0)),
      nu_(nu) {
  if (dim_ == 0) throw ConfigError("noisy quadratic needs d >= 1");
  require_symmetric(A, "A");
  require_symmetric(sigma, "Sigma");
  if (static_cast<std::size_t>(sigma.rows()) != dim_) throw ConfigError("Sigma must be d x d");
  if (w_star_.dim() != dim_ || w0_.dim() != dim_)
    throw ConfigError("w_star and w0 must have dimension d");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be positive");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(A);
  alpha_ = eig_a.eigenvalues().minCoeff();
  beta_ = eig_a.eigenvalues().maxCoeff();
  if (!(alpha_ > 0.0)) throw ConfigError("A must be positive definite");

  A_.resize(dim_ * dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) A_[i * dim_ + j] = A(i, j);

  const Eigen::MatrixXd scaled = nu * sigma;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_s(scaled);
  const Eigen::VectorXd& lam = eig_s.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (lam.minCoeff() < -tol) throw ConfigError("Sigma must be positive semidefinite");

  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    if (lam(k) > tol) kept.push_back(k);
  noise_rank_ = kept.size();
  noise_factor_.assign(dim_ * noise_rank_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t c = 0; c < noise_rank_; ++c)
      noise_factor_[i * noise_rank_ + c] =
          eig_s.eigenvectors()(i, kept[c]) * std::sqrt(lam(kept[c]));
  trace_noise_ = noise_rank_ == 0 ? 0.0 : scaled.trace();
}

NoisyQuadratic NoisyQuadratic::diagonal(const std::vector<double>& a_diag,
                                        const std::vector<double>& sigma_diag,
                                        ParamVector w_star, ParamVector w0, double nu) {
  const std::size_t d = a_diag.size();
  if (sigma_diag.size() != d) throw ConfigError("a_diag and sigma_diag lengths differ");
  for (double s : sigma_diag)
    if (s < 0.0) throw ConfigError("Sigma must be positive semidefinite");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    A(i, i) = a_diag[i];
    S(i, i) = sigma_diag[i];
  }
  NoisyQuadratic q(A, S, std::move(w_star), std::move(w0), nu);
  // Keep the per-coordinate factor for diagonal noise: cheaper, and each
  // coordinate consumes exactly one draw.
  double trace = 0.0;
  bool any = false;
  q.noise_factor_.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    q.noise_factor_[i] = std::sqrt(nu * sigma_diag[i]);
    trace += nu * sigma_diag[i];
    any = any || sigma_diag[i] > 0.0;
  }
  q.noise_diagonal_ = true;
  q.noise_rank_ = any ? d : 0;
  q.trace_noise_ = any ? trace : 0.0;
  if (!any) q.noise_factor_.clear();
  return q;
}

Batch NoisyQuadratic::sample_batch(RngStream& rng, int worker_index) const {
  GaussianDraw draw;
  draw.z.resize(noise_rank_);
  for (double& z : draw.z) z = rng.normal();
  return Batch{std::move(draw), worker_index};
}

void NoisyQuadratic::residual(const ParamVector& w, ParamVector& e) const {
  check_dim(w);
  if (e.dim() != dim_) e = ParamVector(dim_);
  kernels::sub(w.span(), w_star_.span(), e.span());
}

void NoisyQuadratic::apply_A(const ParamVector& e, ParamVector& out) const {
  if (out.dim() != dim_) out = ParamVector(dim_);
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < dim_; ++i) out[i] = k.dot(A_.data() + i * dim_, e.data(), dim_);
}

void NoisyQuadratic::stochastic_gradient(const ParamVector& w, const Batch& b,
                                         ParamVector& out) const {
  true_gradient(w, out);
  if (noise_rank_ == 0) return;
  const auto* draw = std::get_if<GaussianDraw>(&b.payload);
  if (!draw || draw->z.size() != noise_rank_)
    throw ConfigError("batch does not match the noisy quadratic's noise model");
  if (noise_diagonal_) {
    for (std::size_t i = 0; i < dim_; ++i) out[i] += noise_factor_[i] * draw->z[i];
  } else {
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < dim_; ++i)
      out[i] += k.dot(noise_factor_.data() + i * noise_rank_, draw->z.data(), noise_rank_);
  }
}

void NoisyQuadratic::true_gradient(const ParamVector& w, ParamVector& out) const {
  ParamVector e;
  residual(w, e);
  apply_A(e, out);
}

double NoisyQuadratic::value(const ParamVector& w) const {
  ParamVector e, ae;
  residual(w, e);
  apply_A(e, ae);
  return 0.5 * kernels::dot(e.span(), ae.span());
}

GradientMoments NoisyQuadratic::analytic_moments(const ParamVector& w) const {
  const ParamVector g = true_gradient(w);
  return {kernels::sq_norm(g.span()), trace_noise_};
}

}  // namespace adascale
