#pragma once

#include <span>
#include <vector>

#include "rdp/rng.hpp"
#include "rdp/types.hpp"

namespace rdp {

/// Discrete variance-preserving noise schedule on steps t = 1..T.
///
/// alpha_bar(t) = prod_{i<=t} (1 - beta_i), stored through the exact
/// recurrence alpha_bar(t) = (1 - beta_t) * alpha_bar(t-1) with alpha_bar(0) = 1.
class Schedule {
 public:
  static Schedule linear(double beta_min, double beta_max, int n_steps);
  static Schedule from_betas(std::vector<double> betas);

  int n_steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  /// Valid for t in [0, n_steps]; alpha_bar(0) == 1.
  double alpha_bar(int t) const;

  std::span<const double> betas() const { return betas_; }
  /// Length n_steps; element t-1 holds alpha_bar(t).
  std::span<const double> alpha_bars() const { return {alpha_bars_.data() + 1, betas_.size()}; }

 private:
  explicit Schedule(std::vector<double> betas);

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;  // index 0 holds alpha_bar(0) = 1
};

/// Draws x_t ~ N(sqrt(alpha_bar_t) x0, (1 - alpha_bar_t) I).
Vector forward_perturb(const Vector& x0, int t, const Schedule& sched, Rng& rng);

/// x + beta (x / 2 + s_hat) + sqrt(beta) z. `noise` may be empty for z = 0.
Vector reverse_update(const Vector& x_t, const Vector& s_hat, double beta, const Vector& noise);

/// One ancestral reverse-SDE step from t to t-1. No noise is injected at
/// t == 1 when `deterministic_last_step` is set.
Vector ancestral_step(const Vector& x_t, const Vector& s_hat, int t, const Schedule& sched,
                      Rng& rng, bool deterministic_last_step = true);

}  // namespace rdp
