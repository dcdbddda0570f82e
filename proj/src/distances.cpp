#include "rdp/distances.hpp"

#include <algorithm>
#include <cmath>

namespace rdp {

double w2_squared_1d(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "empty_input", "W2 needs nonempty sample sets");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
  }
  // Integrate (F_a^{-1}(u) - F_b^{-1}(u))^2 over the merged quantile breakpoints.
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double u = 0.0, s = 0.0;
  while (i < a.size() && j < b.size()) {
    const double next_a = static_cast<double>(i + 1) / na;
    const double next_b = static_cast<double>(j + 1) / nb;
    const double next = std::min(next_a, next_b);
    s += (next - u) * (a[i] - b[j]) * (a[i] - b[j]);
    u = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return s;
}

double sliced_w2(const std::vector<Vector>& a, const std::vector<Vector>& b, int n_proj, Rng& rng) {
  require(!a.empty() && !b.empty(), "empty_input", "sliced W2 needs nonempty sample sets");
  require(n_proj >= 1, "invalid_argument", "n_proj must be at least 1");
  const Eigen::Index d = a.front().size();
  for (const auto& v : a) require(v.size() == d, "dimension_mismatch", "samples must share one dimension");
  for (const auto& v : b) require(v.size() == d, "dimension_mismatch", "samples must share one dimension");
  std::vector<double> pa(a.size()), pb(b.size());
  double total = 0.0;
  for (int k = 0; k < n_proj; ++k) {
    Vector dir = rng.normal_vector(d);
    dir /= dir.norm();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] = dir.dot(a[i]);
    for (std::size_t i = 0; i < b.size(); ++i) pb[i] = dir.dot(b[i]);
    total += w2_squared_1d(pa, pb);
  }
  return std::sqrt(total / n_proj);
}

McEstimate kl_mc(const GaussianMixture& p, const GaussianMixture& q, int n, Rng& rng) {
  require(p.dim() == q.dim(), "dimension_mismatch", "KL needs mixtures of equal dimension");
  require(n >= 2, "invalid_argument", "KL estimate needs at least 2 draws");
  double sum = 0.0, sum_sq = 0.0;
  for (const Vector& x : p.sample(n, rng)) {
    const double v = p.log_density(x) - q.log_density(x);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
  return {mean, std::sqrt(var / n)};
}

double gaussian_kl(const Vector& mu_p, const Matrix& cov_p, const Vector& mu_q, const Matrix& cov_q) {
  const Eigen::Index d = mu_p.size();
  require(mu_q.size() == d && cov_p.rows() == d && cov_q.rows() == d, "dimension_mismatch",
          "Gaussian KL needs matching dimensions");
  const Eigen::LLT<Matrix> lp(cov_p), lq(cov_q);
  require(lp.info() == Eigen::Success && lq.info() == Eigen::Success, "not_positive_definite",
          "Gaussian KL needs positive-definite covariances");
  const double logdet_p = 2.0 * lp.matrixLLT().diagonal().array().log().sum();
  const double logdet_q = 2.0 * lq.matrixLLT().diagonal().array().log().sum();
  const Vector diff = mu_q - mu_p;
  const double trace = lq.solve(cov_p).trace();
  return 0.5 * (trace + diff.dot(lq.solve(diff)) - static_cast<double>(d) + logdet_q - logdet_p);
}

SampleMoments sample_moments(const std::vector<Vector>& samples) {
  require(samples.size() >= 2, "empty_input", "moments need at least 2 samples");
  const Eigen::Index d = samples.front().size();
  SampleMoments m{Vector::Zero(d), Matrix::Zero(d, d)};
  for (const auto& s : samples) m.mean += s;
  m.mean /= static_cast<double>(samples.size());
  for (const auto& s : samples) m.cov += (s - m.mean) * (s - m.mean).transpose();
  m.cov /= static_cast<double>(samples.size() - 1);
  return m;
}

}  // namespace rdp
