#pragma once

#include <vector>

#include "rdp/types.hpp"

namespace rdp {

/// 10 log10(range^2 / MSE); +inf when x == x_ref exactly.
double psnr(const Vector& x, const Vector& x_ref, double data_range = 1.0);

/// Mean SSIM over all valid 7x7 windows (Gaussian weights, sigma 1.5,
/// k1 = 0.01, k2 = 0.03). Needs both grid sides >= 7.
double ssim(const Vector& x, const Vector& x_ref, GridShape shape, double data_range = 1.0);

/// ||x - x_ref||_1 / ||x_ref||_1.
double nmae(const Vector& x, const Vector& x_ref);

/// Linear-interpolation quantile (h = q (n - 1)) of unsorted values.
double quantile(std::vector<double> values, double q);

struct Summary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr() const { return q75 - q25; }
};

Summary summarize(const std::vector<double>& values);

}  // namespace rdp
