#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdp/samplers.hpp"

namespace rdp {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_points = 0;
};

/// Least-squares fit of log y = a + b log x over points with x > 0 and y > 0,
/// with a Student-t confidence interval on b. Needs at least 4 such points.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double level = 0.95);

struct ProbeCurve {
  std::string label;
  std::vector<double> abscissa;
  std::vector<double> ordinate;
  SlopeFit fit;
};

/// max over x >= x_max/10 divided by max over x <= x_max/10 (0/0 counts as 1).
double last_decade_growth(const ProbeCurve& curve);
/// max / median of the ordinate over the top decade of the abscissa.
double top_decade_max_over_median(const ProbeCurve& curve);

/// Named weight rule; an empty spec means the unweighted guidance.
struct NamedWeight {
  std::string name;
  std::optional<WeightSpec> spec;
};

/// ||guidance|| at a fixed (x_t, t) with the measurement set to the
/// prediction at x_t plus `magnitude` on coordinate `coord`.
std::vector<ProbeCurve> guidance_sup_probe(const std::vector<NamedWeight>& weights, const Problem& problem,
                                           const Vector& x_t, int t, Eigen::Index coord,
                                           const std::vector<double>& magnitudes);

enum class DivergenceProxy {
  kSlicedW2,
  /// KL between Gaussians fitted to the two sample sets.
  kGaussianKl,
};

struct PifOptions {
  int n_chains = 200;
  std::uint64_t master_seed = 0;
  DivergenceProxy proxy = DivergenceProxy::kSlicedW2;
  int n_proj = 64;
  int n_threads = 0;
};

struct PifResult {
  ProbeCurve plain;
  ProbeCurve robust;
};

/// For each magnitude M, adds M to y* on the designated coordinates, runs
/// both samplers with matched chain seeds, and records the divergence of the
/// draws from the draws at the clean y*.
PifResult pif_probe(const SamplerConfig& plain, const SamplerConfig& robust, const Problem& clean,
                    const std::vector<Eigen::Index>& coords, const std::vector<double>& magnitudes,
                    const PifOptions& options);

/// sup over a grid on |r| <= r_bound of |r / sigma^2 - psi_imq(r)| for each c.
ProbeCurve imq_gap_curve(const std::vector<double>& c_values, double r_bound, double sigma_y, int n_grid = 4001);

/// Divergence between RDP-IMQ draws at fixed c and plain draws on matched seeds.
ProbeCurve sampled_bias_curve(const SamplerConfig& plain, const std::vector<double>& c_values, const Problem& problem,
                              const PifOptions& options);

struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  /// P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
  double p_value = 1.0;
};

/// One-sided sign test that `a` is smaller than `b` pairwise.
SignTest sign_test_less(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace rdp
