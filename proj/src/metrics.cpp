#include "rdp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdp {
namespace {

void require_same(const Vector& x, const Vector& x_ref) {
  require(x.size() == x_ref.size() && x.size() > 0, "dimension_mismatch", "metric inputs must have equal, nonzero length");
}

Matrix ssim_window() {
  constexpr int kSize = 7;
  constexpr double kSigma = 1.5;
  Matrix w(kSize, kSize);
  for (int i = 0; i < kSize; ++i)
    for (int j = 0; j < kSize; ++j)
      w(i, j) = std::exp(-((i - 3) * (i - 3) + (j - 3) * (j - 3)) / (2.0 * kSigma * kSigma));
  return w / w.sum();
}

}  // namespace

double psnr(const Vector& x, const Vector& x_ref, double data_range) {
  require_same(x, x_ref);
  require(data_range > 0.0, "invalid_argument", "data_range must be positive");
  const double mse = (x - x_ref).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const Vector& x, const Vector& x_ref, GridShape shape, double data_range) {
  require_same(x, x_ref);
  require(shape.size() == x.size(), "dimension_mismatch", "grid shape does not match the signal length");
  require(shape.rows >= 7 && shape.cols >= 7, "invalid_argument", "ssim needs a grid of at least 7x7");
  require(data_range > 0.0, "invalid_argument", "data_range must be positive");
  static const Matrix window = ssim_window();
  const double c1 = std::pow(0.01 * data_range, 2);
  const double c2 = std::pow(0.03 * data_range, 2);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      x.data(), shape.rows, shape.cols);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> b(
      x_ref.data(), shape.rows, shape.cols);
  double total = 0.0;
  int count = 0;
  for (int r = 0; r + 7 <= shape.rows; ++r) {
    for (int c = 0; c + 7 <= shape.cols; ++c) {
      const auto pa = a.block(r, c, 7, 7).array();
      const auto pb = b.block(r, c, 7, 7).array();
      const double mu_a = (window.array() * pa).sum();
      const double mu_b = (window.array() * pb).sum();
      const double var_a = (window.array() * (pa - mu_a).square()).sum();
      const double var_b = (window.array() * (pb - mu_b).square()).sum();
      const double cov = (window.array() * (pa - mu_a) * (pb - mu_b)).sum();
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return total / count;
}

double nmae(const Vector& x, const Vector& x_ref) {
  require_same(x, x_ref);
  const double denom = x_ref.lpNorm<1>();
  require(denom > 0.0, "invalid_argument", "nmae reference must be nonzero");
  return (x - x_ref).lpNorm<1>() / denom;
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "empty_input", "quantile of an empty set");
  require(q >= 0.0 && q <= 1.0, "invalid_argument", "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t up = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[up] - values[lo]);
}

Summary summarize(const std::vector<double>& values) {
  return {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75)};
}

}  // namespace rdp
