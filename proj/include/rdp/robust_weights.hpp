#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "rdp/types.hpp"

namespace rdp {

struct UniformWeight {};

/// Inverse multi-quadratic weight (1 + r^2/c^2)^(-1/2).
struct ImqWeight {
  double c = 1.0;
};

/// Weight form of the Huber loss: 1 inside delta, delta/|r| outside.
struct HuberWeight {
  double delta = 1.0;
};

/// (1 + r_i^2 / (s_i^2 c^2))^(-1/2) with per-component noise standard
/// deviations s_i. An empty `scales` uses `default_scale` for every component.
struct MahalanobisWeight {
  double c = 1.0;
  Vector scales;
  double default_scale = 1.0;
};

/// One shared weight c / (eps + ||r||) for the whole residual vector. The
/// scalar interface treats ||r|| as |r|.
struct GlobalScaleWeight {
  double c = 1.0;
  double eps = 1e-3;
};

using WeightFn = std::variant<UniformWeight, ImqWeight, HuberWeight, MahalanobisWeight, GlobalScaleWeight>;

std::string_view weight_name(const WeightFn& wf);
void validate(const WeightFn& wf);

/// Scalar weight and derivative for component `i` (only Mahalanobis uses i).
double weight(const WeightFn& wf, double r, Eigen::Index i = 0);
double weight_deriv(const WeightFn& wf, double r, Eigen::Index i = 0);

/// Per-component influence (2 r w(r) + r^2 w'(r)) / (2 sigma_y^2).
double psi(const WeightFn& wf, double r, double sigma_y, Eigen::Index i = 0);

struct RobustReport {
  double sup_rw = 0.0;
  double sup_r2wprime = 0.0;
  double growth_rw = 1.0;
  double growth_r2wprime = 1.0;
  bool robust = false;
};

/// Grid certificate for sup|r w(r)| < inf and sup|r^2 w'(r)| < inf. Evaluates
/// both on a log-spaced grid over [1e-9 r_max, r_max]; a curve counts as
/// bounded when its sup over the whole grid exceeds the sup over
/// [.., r_max / 10] by less than 5%. Heuristic, not a proof.
RobustReport check_robust_condition(const WeightFn& wf, double r_max, int n_grid = 2000);

/// Quantile_q(|r|) with linear interpolation between order statistics,
/// floored at c_min.
double adaptive_c(const Vector& abs_residuals, double q, double c_min = 1e-8);

/// Threshold parameter (c, delta, or c_g); 0 for Uniform.
double threshold(const WeightFn& wf);
WeightFn with_threshold(const WeightFn& wf, double c);

/// Weight rule plus an optional adaptive quantile for its threshold.
struct WeightSpec {
  WeightSpec() = default;
  WeightSpec(WeightFn f, std::optional<double> q = std::nullopt, double floor = 1e-8)
      : fn(std::move(f)), adaptive_q(q), c_min(floor) {}

  WeightFn fn = UniformWeight{};
  std::optional<double> adaptive_q;
  double c_min = 1e-8;
};

void validate(const WeightSpec& spec);

/// Weight rule with its threshold fixed for residual vector r.
WeightFn resolve(const WeightSpec& spec, const Vector& r);

/// Component weights for residual vector r.
Vector weights(const WeightFn& wf, const Vector& r);

/// Gradient in r of sum_i w_i(r) r_i^2 / (2 sigma_y^2), weights not held fixed.
Vector psi_vector(const WeightFn& wf, const Vector& r, double sigma_y);

}  // namespace rdp
