#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "rdp/rng.hpp"
#include "rdp/types.hpp"

namespace rdp {

struct GaussianNoise {
  double sigma_y = 0.05;
};

/// Student-t noise rescaled so its standard deviation equals sigma_y (nu > 2).
struct StudentTNoise {
  double nu = 2.5;
  double sigma_y = 0.05;
};

/// Base Gaussian noise whose entries on a random ceil(p * d_y) subset are
/// multiplied by m.
struct ImpulsiveNoise {
  double sigma_y = 0.05;
  double fraction = 0.05;
  double magnitude = 30.0;
};

/// Base Gaussian noise; a random ceil(p * d_y) subset of measurements is
/// replaced by uniform draws from [low, high].
struct UniformReplacementNoise {
  double sigma_y = 0.05;
  double fraction = 0.05;
  double low = -1.0;
  double high = 1.0;
};

using NoiseScheme = std::variant<GaussianNoise, StudentTNoise, ImpulsiveNoise, UniformReplacementNoise>;

struct Corrupted {
  Vector y;
  std::vector<int> outlier_mask;
};

void validate(const NoiseScheme& scheme);
std::string_view scheme_name(const NoiseScheme& scheme);
/// Nominal Gaussian noise level the likelihood should assume.
double nominal_sigma(const NoiseScheme& scheme);
/// Scale applied to standard t draws so the noise std equals sigma_y.
double student_t_scale(double nu, double sigma_y);
/// ceil(p * d_y), tolerant to floating error in p * d_y.
Eigen::Index outlier_count(double fraction, Eigen::Index d_y);

Corrupted corrupt(const Vector& y_star, const NoiseScheme& scheme, Rng& rng);

}  // namespace rdp
