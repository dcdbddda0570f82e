#pragma once

#include <vector>

#include "rdp/covariance.hpp"
#include "rdp/rng.hpp"
#include "rdp/schedule.hpp"
#include "rdp/types.hpp"

namespace rdp {

struct GaussianComponent {
  Vector mean;
  Covariance cov;

  bool operator==(const GaussianComponent&) const = default;
};

/// Per-point quantities shared by the score and its Hessian-vector products.
struct ScoreDetail {
  Vector responsibilities;          // gamma_k(x)
  std::vector<Vector> comp_scores;  // -Sigma_k^{-1} (x - mu_k)
  Vector score;                     // sum_k gamma_k comp_scores[k]
  double log_density = 0.0;
};

/// Finite mixture of Gaussians. Immutable after construction.
class GaussianMixture {
 public:
  GaussianMixture(std::vector<double> weights, std::vector<GaussianComponent> components);

  Eigen::Index dim() const { return components_.front().mean.size(); }
  std::size_t size() const { return components_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<GaussianComponent>& components() const { return components_; }

  double log_density(const Vector& x) const;
  Vector score(const Vector& x) const;
  ScoreDetail score_detail(const Vector& x) const;

  /// Hessian of log density applied to v, reusing a detail computed at the same x.
  Vector hessian_vector(const ScoreDetail& detail, const Vector& v) const;
  Matrix hessian(const Vector& x) const;

  Vector mean() const;
  Matrix covariance() const;

  /// Mixture after the VP perturbation with the given alpha_bar.
  GaussianMixture diffused(double alpha_bar) const;

  std::vector<Vector> sample(int n, Rng& rng) const;

  bool operator==(const GaussianMixture&) const = default;

 private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<GaussianComponent> components_;
};

/// Marginal of x_t when x_0 follows `gm`: means sqrt(ab) mu_k, covariances ab Sigma_k + (1-ab) I.
GaussianMixture gm_marginal_at_t(const GaussianMixture& gm, const Schedule& sched, int t);

/// Exact posterior of x under y = A x + N(0, sigma_y^2 I) with mixture prior `gm`.
GaussianMixture gm_posterior_linear(const GaussianMixture& gm, const Matrix& a, double sigma_y,
                                    const Vector& y);

/// Exact score of p_t(x_t | y) for a linear-Gaussian likelihood.
Vector gm_conditional_score(const GaussianMixture& gm, const Matrix& a, double sigma_y,
                            const Vector& y, int t, const Schedule& sched, const Vector& x_t);

std::vector<Vector> gm_sample(const GaussianMixture& gm, int n, Rng& rng);

}  // namespace rdp
