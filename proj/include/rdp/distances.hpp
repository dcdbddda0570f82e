#pragma once

#include <vector>

#include "rdp/gaussian_mixture.hpp"
#include "rdp/rng.hpp"
#include "rdp/types.hpp"

namespace rdp {

/// Squared 2-Wasserstein distance between two 1D empirical distributions
/// (sizes may differ).
double w2_squared_1d(std::vector<double> a, std::vector<double> b);

/// sqrt of the mean over n_proj random unit directions of the 1D squared W2
/// between the projected sample sets.
double sliced_w2(const std::vector<Vector>& a, const std::vector<Vector>& b, int n_proj, Rng& rng);

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo KL(p || q) from n draws of p.
McEstimate kl_mc(const GaussianMixture& p, const GaussianMixture& q, int n, Rng& rng);

/// Closed-form KL between Gaussians N(mu_p, cov_p) and N(mu_q, cov_q).
double gaussian_kl(const Vector& mu_p, const Matrix& cov_p, const Vector& mu_q, const Matrix& cov_q);

struct SampleMoments {
  Vector mean;
  Matrix cov;
};

/// Sample mean and unbiased covariance.
SampleMoments sample_moments(const std::vector<Vector>& samples);

}  // namespace rdp
