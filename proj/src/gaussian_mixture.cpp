#include "rdp/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rdp {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

double component_log_pdf(const GaussianComponent& c, const Vector& x, Vector* eig_coords) {
  Vector z = c.cov.to_eigen(x - c.mean);
  const double quad = z.cwiseAbs2().cwiseQuotient(c.cov.eigenvalues()).sum();
  if (eig_coords) *eig_coords = std::move(z);
  return -0.5 * (quad + c.cov.log_det() + static_cast<double>(x.size()) * kLog2Pi);
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<GaussianComponent> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  require(!components_.empty(), "invalid_mixture", "mixture needs at least one component");
  require(weights_.size() == components_.size(), "invalid_mixture",
          "mixture weight count differs from component count");
  double total = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, "invalid_mixture", "mixture weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, "invalid_mixture", "mixture weights must sum to 1");
  const Eigen::Index d = components_.front().mean.size();
  for (const auto& c : components_) {
    require(c.mean.size() == d && c.cov.dim() == d, "invalid_mixture",
            "all mixture components must share one dimension");
    require(c.mean.allFinite(), "invalid_mixture", "component mean has non-finite entries");
  }
  log_weights_.reserve(weights_.size());
  for (double w : weights_) log_weights_.push_back(std::log(w));
}

double GaussianMixture::log_density(const Vector& x) const {
  require(x.size() == dim(), "dimension_mismatch", "point dimension differs from mixture");
  Vector terms(static_cast<Eigen::Index>(size()));
  for (std::size_t k = 0; k < size(); ++k)
    terms[static_cast<Eigen::Index>(k)] = log_weights_[k] + component_log_pdf(components_[k], x, nullptr);
  return log_sum_exp(terms);
}

ScoreDetail GaussianMixture::score_detail(const Vector& x) const {
  require(x.size() == dim(), "dimension_mismatch", "point dimension differs from mixture");
  const auto k_count = static_cast<Eigen::Index>(size());
  ScoreDetail out;
  out.comp_scores.resize(size());
  Vector logs(k_count);
  Vector z;
  for (std::size_t k = 0; k < size(); ++k) {
    const auto& c = components_[k];
    logs[static_cast<Eigen::Index>(k)] = log_weights_[k] + component_log_pdf(c, x, &z);
    out.comp_scores[k] = -c.cov.from_eigen(z.cwiseQuotient(c.cov.eigenvalues()));
  }
  out.log_density = log_sum_exp(logs);
  out.responsibilities = (logs.array() - out.log_density).exp().matrix();
  out.score = Vector::Zero(dim());
  for (std::size_t k = 0; k < size(); ++k) {
    const double g = out.responsibilities[static_cast<Eigen::Index>(k)];
    if (g > 0.0) out.score += g * out.comp_scores[k];
  }
  return out;
}

Vector GaussianMixture::score(const Vector& x) const { return score_detail(x).score; }

// H v = sum_k g_k (-P_k v + s_k (s_k . v)) - s (s . v)
Vector GaussianMixture::hessian_vector(const ScoreDetail& detail, const Vector& v) const {
  require(v.size() == dim(), "dimension_mismatch", "vector dimension differs from mixture");
  Vector out = -detail.score * detail.score.dot(v);
  for (std::size_t k = 0; k < size(); ++k) {
    const double g = detail.responsibilities[static_cast<Eigen::Index>(k)];
    if (g == 0.0) continue;
    const auto& c = components_[k];
    out += g * (detail.comp_scores[k] * detail.comp_scores[k].dot(v) - c.cov.solve(v));
  }
  return out;
}

Matrix GaussianMixture::hessian(const Vector& x) const {
  const ScoreDetail detail = score_detail(x);
  Matrix h = -detail.score * detail.score.transpose();
  for (std::size_t k = 0; k < size(); ++k) {
    const double g = detail.responsibilities[static_cast<Eigen::Index>(k)];
    const auto& c = components_[k];
    h += g * (detail.comp_scores[k] * detail.comp_scores[k].transpose() - c.cov.precision_matrix());
  }
  return 0.5 * (h + h.transpose());
}

Vector GaussianMixture::mean() const {
  Vector m = Vector::Zero(dim());
  for (std::size_t k = 0; k < size(); ++k) m += weights_[k] * components_[k].mean;
  return m;
}

Matrix GaussianMixture::covariance() const {
  const Vector m = mean();
  Matrix c = Matrix::Zero(dim(), dim());
  for (std::size_t k = 0; k < size(); ++k) {
    const Vector dm = components_[k].mean - m;
    c += weights_[k] * (components_[k].cov.dense_matrix() + dm * dm.transpose());
  }
  return c;
}

GaussianMixture GaussianMixture::diffused(double alpha_bar) const {
  require(alpha_bar > 0.0 && alpha_bar <= 1.0, "invalid_argument", "alpha_bar must lie in (0, 1]");
  const double root = std::sqrt(alpha_bar);
  std::vector<GaussianComponent> comps;
  comps.reserve(size());
  for (const auto& c : components_) comps.push_back({root * c.mean, c.cov.diffused(alpha_bar)});
  return GaussianMixture(weights_, std::move(comps));
}

std::vector<Vector> GaussianMixture::sample(int n, Rng& rng) const {
  require(n >= 1, "invalid_argument", "sample count must be >= 1");
  std::vector<double> cdf(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cdf.begin());
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
    k = std::min(k, size() - 1);
    const auto& c = components_[k];
    out.push_back(c.mean + c.cov.sqrt_apply(rng.normal_vector(dim())));
  }
  return out;
}

GaussianMixture gm_marginal_at_t(const GaussianMixture& gm, const Schedule& sched, int t) {
  require(t >= 0 && t <= sched.n_steps(), "step_out_of_range", "marginal step out of range");
  return gm.diffused(sched.alpha_bar(t));
}

GaussianMixture gm_posterior_linear(const GaussianMixture& gm, const Matrix& a, double sigma_y,
                                    const Vector& y) {
  require(a.cols() == gm.dim(), "dimension_mismatch", "operator columns differ from prior dimension");
  require(a.rows() == y.size(), "dimension_mismatch", "operator rows differ from measurement length");
  require(std::isfinite(sigma_y) && sigma_y > 0.0, "invalid_argument", "sigma_y must be positive");
  const double noise_var = sigma_y * sigma_y;
  const Eigen::Index dy = a.rows();
  const Matrix ata = a.transpose() * a / noise_var;
  const Vector aty = a.transpose() * y / noise_var;

  std::vector<GaussianComponent> comps;
  Vector log_w(static_cast<Eigen::Index>(gm.size()));
  for (std::size_t k = 0; k < gm.size(); ++k) {
    const auto& c = gm.components()[k];
    const Matrix sigma = c.cov.dense_matrix();
    const Matrix prior_precision = c.cov.precision_matrix();
    Matrix precision = prior_precision + ata;
    precision = 0.5 * (precision + precision.transpose());
    Eigen::LLT<Matrix> llt(precision);
    require(llt.info() == Eigen::Success, "numerical_failure", "posterior precision not PD");
    const Matrix post_cov = llt.solve(Matrix::Identity(gm.dim(), gm.dim()));
    const Vector post_mean = llt.solve(prior_precision * c.mean + aty);

    Matrix evidence_cov = a * sigma * a.transpose();
    evidence_cov.diagonal().array() += noise_var;
    evidence_cov = 0.5 * (evidence_cov + evidence_cov.transpose());
    Eigen::LLT<Matrix> ellt(evidence_cov);
    require(ellt.info() == Eigen::Success, "numerical_failure", "evidence covariance not PD");
    const Vector resid = y - a * c.mean;
    const Vector half = ellt.matrixL().solve(resid);
    const double log_det = 2.0 * ellt.matrixLLT().diagonal().array().log().sum();
    log_w[static_cast<Eigen::Index>(k)] =
        std::log(gm.weights()[k]) -
        0.5 * (half.squaredNorm() + log_det + static_cast<double>(dy) * kLog2Pi);
    comps.push_back({post_mean, Covariance::dense(0.5 * (post_cov + post_cov.transpose()))});
  }
  const double lse = log_w.maxCoeff() + std::log((log_w.array() - log_w.maxCoeff()).exp().sum());
  std::vector<double> weights(gm.size());
  double total = 0.0;
  for (std::size_t k = 0; k < gm.size(); ++k) {
    weights[k] = std::exp(log_w[static_cast<Eigen::Index>(k)] - lse);
    total += weights[k];
  }
  for (double& w : weights) w /= total;
  return GaussianMixture(std::move(weights), std::move(comps));
}

Vector gm_conditional_score(const GaussianMixture& gm, const Matrix& a, double sigma_y,
                            const Vector& y, int t, const Schedule& sched, const Vector& x_t) {
  return gm_marginal_at_t(gm_posterior_linear(gm, a, sigma_y, y), sched, t).score(x_t);
}

std::vector<Vector> gm_sample(const GaussianMixture& gm, int n, Rng& rng) { return gm.sample(n, rng); }

}  // namespace rdp
