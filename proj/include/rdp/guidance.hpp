#pragma once

#include <memory>
#include <optional>

#include "rdp/forward_model.hpp"
#include "rdp/robust_weights.hpp"
#include "rdp/schedule.hpp"
#include "rdp/score_source.hpp"
#include "rdp/types.hpp"

namespace rdp {

enum class JacobianMode {
  /// Exact Jacobian when the score source has a Hessian-vector product,
  /// otherwise the surrogate.
  kAuto,
  kExact,
  /// J ~ I / sqrt(ab_t).
  kSurrogate,
};

/// Variance r_t^2 assumed for x_0 given x_t by the spectral guidance.
enum class PigdmVariance {
  /// 1 - ab_t; exact for a standard normal prior.
  kOneMinusAlphaBar,
  /// (1 - ab_t) / ab_t.
  kRatio,
};

/// Everything a sampler needs about one inverse problem.
struct Problem {
  std::shared_ptr<const ScoreSource> score;
  std::shared_ptr<const ForwardModel> model;
  Vector y;
  double sigma_y = 1.0;
  Schedule sched = Schedule::linear(1e-4, 0.02, 1000);
  /// Filled by `make_problem` for linear models.
  std::shared_ptr<const Svd> svd;
};

Problem make_problem(std::shared_ptr<const ScoreSource> score, std::shared_ptr<const ForwardModel> model,
                     Vector y, double sigma_y, Schedule sched);

struct GuidanceOptions {
  JacobianMode jacobian = JacobianMode::kAuto;
  bool differentiate_weights = false;
};

struct Guidance {
  Vector guidance;
  /// Prior score at (x_t, t).
  Vector score;
  Vector x0_hat;
  Vector residuals;
  /// Empty for the plain (unweighted) method.
  Vector weights;
  /// Threshold of the resolved weight rule; 0 when unweighted.
  double threshold = 0.0;
};

/// J_{x0_hat}(x_t)^T u.
Vector tweedie_vjp(const ScoreEval& eval, const Vector& u, int t, const Schedule& sched, JacobianMode mode);

/// Gradient in x_t of sum_i w_i log N(y_i; F(x0_hat)_i, sigma_y^2), with the
/// weights fixed at the current residual unless `differentiate_weights`.
/// `weight` empty gives plain DPS guidance.
Guidance rdp_guidance(const Vector& x_t, int t, const Problem& problem, const std::optional<WeightSpec>& weight,
                      const GuidanceOptions& options = {});

struct LgdOptions {
  int n_mc = 10;
  double kappa = 1.0;
};

struct LgdGuidance : Guidance {
  /// log-mean-exp of the per-draw weighted log-likelihoods (constants dropped).
  double surrogate = 0.0;
  /// Plain mean of the same per-draw values.
  double mean_log_lik = 0.0;
};

/// Monte-Carlo smoothed guidance: perturbations x0_hat + rho_t xi_j with
/// rho_t^2 = kappa (1 - ab_t) / ab_t; weights from the mean residual.
LgdGuidance lgd_guidance(const Vector& x_t, int t, const Problem& problem, const std::optional<WeightSpec>& weight,
                         const LgdOptions& lgd, Rng& rng, const GuidanceOptions& options = {});

double pigdm_variance(PigdmVariance rule, int t, const Schedule& sched);

/// J^T A^T (r_t^2 A A^T + sigma_y^2 I)^{-1} (W r) in the SVD basis of A.
Guidance pigdm_guidance(const Vector& x_t, int t, const Problem& problem, const std::optional<WeightSpec>& weight,
                        PigdmVariance rule, const GuidanceOptions& options = {});

}  // namespace rdp
