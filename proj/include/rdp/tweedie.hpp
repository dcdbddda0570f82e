#pragma once

#include <array>
#include <string_view>

#include "rdp/schedule.hpp"
#include "rdp/types.hpp"

namespace rdp {

/// First-order Tweedie estimate (x_t + (1 - ab_t) score) / sqrt(ab_t).
Vector tweedie_denoise(const Vector& x_t, const Vector& score, int t, const Schedule& sched);

/// Candidate readings of the second-order Tweedie covariance built from the
/// Hessian H of log p_t at x_t.
enum class TweedieCovConvention {
  /// (1 - ab_t) (I / ab_t + H), the formula as usually quoted.
  kQuotedCumulative,
  /// The quoted formula with the one-step alpha_t = 1 - beta_t in place of ab_t.
  kQuotedStep,
  /// ((1 - ab_t) / ab_t) (I + (1 - ab_t) H).
  kVarianceScaled,
};

inline constexpr std::array<TweedieCovConvention, 3> kAllTweedieConventions = {
    TweedieCovConvention::kQuotedCumulative, TweedieCovConvention::kQuotedStep,
    TweedieCovConvention::kVarianceScaled};

std::string_view to_string(TweedieCovConvention c);

struct TweedieCov {
  Matrix cov;
  double min_eigenvalue = 0.0;
  bool psd = false;
};

/// Posterior covariance of x_0 given x_t. A negative eigenvalue is reported
/// through `psd`, never clamped.
TweedieCov tweedie_posterior_cov(const Matrix& hessian, int t, const Schedule& sched,
                                 TweedieCovConvention convention);

struct ConventionCheck {
  TweedieCovConvention convention;
  double relative_error = 0.0;  // against Gaussian conditioning
  bool psd = false;
};

struct ConventionReport {
  std::array<ConventionCheck, 3> checks;
  TweedieCovConvention selected;
  bool any_match = false;
};

/// Scores every convention against exact Gaussian conditioning for a
/// reference Gaussian prior at step t and selects the one that matches
/// (relative Frobenius error <= `tolerance`).
ConventionReport reconcile_tweedie_convention(const Schedule& sched, int t, double tolerance = 1e-8);

}  // namespace rdp
