#include "rdp/schedule.hpp"

#include <cmath>
#include <string>

namespace rdp {

Schedule::Schedule(std::vector<double> betas) : betas_(std::move(betas)) {
  require(!betas_.empty(), "invalid_schedule", "schedule needs at least one step");
  alpha_bars_.resize(betas_.size() + 1);
  alpha_bars_[0] = 1.0;
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    const double b = betas_[i];
    require(std::isfinite(b) && b > 0.0 && b < 1.0, "invalid_schedule",
            "beta at step " + std::to_string(i + 1) + " must lie in (0, 1)");
    alpha_bars_[i + 1] = (1.0 - b) * alpha_bars_[i];
  }
}

Schedule Schedule::linear(double beta_min, double beta_max, int n_steps) {
  require(std::isfinite(beta_min) && std::isfinite(beta_max), "invalid_schedule",
          "beta bounds must be finite");
  require(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0, "invalid_schedule",
          "need 0 < beta_min <= beta_max < 1");
  require(n_steps >= 1, "invalid_schedule", "n_steps must be >= 1");
  std::vector<double> betas(static_cast<std::size_t>(n_steps));
  for (int i = 0; i < n_steps; ++i) {
    const double frac = n_steps == 1 ? 0.0 : static_cast<double>(i) / (n_steps - 1);
    betas[static_cast<std::size_t>(i)] = beta_min + (beta_max - beta_min) * frac;
  }
  return Schedule(std::move(betas));
}

Schedule Schedule::from_betas(std::vector<double> betas) { return Schedule(std::move(betas)); }

double Schedule::beta(int t) const {
  require(t >= 1 && t <= n_steps(), "step_out_of_range",
          "step " + std::to_string(t) + " outside [1, " + std::to_string(n_steps()) + "]");
  return betas_[static_cast<std::size_t>(t - 1)];
}

double Schedule::alpha_bar(int t) const {
  require(t >= 0 && t <= n_steps(), "step_out_of_range",
          "step " + std::to_string(t) + " outside [0, " + std::to_string(n_steps()) + "]");
  return alpha_bars_[static_cast<std::size_t>(t)];
}

Vector forward_perturb(const Vector& x0, int t, const Schedule& sched, Rng& rng) {
  require(t >= 1 && t <= sched.n_steps(), "step_out_of_range", "forward_perturb step out of range");
  const double ab = sched.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * rng.normal_vector(x0.size());
}

Vector reverse_update(const Vector& x_t, const Vector& s_hat, double beta, const Vector& noise) {
  require(x_t.size() == s_hat.size(), "dimension_mismatch", "score and state dimensions differ");
  require(s_hat.allFinite(), "non_finite", "non-finite score in reverse step");
  Vector next = x_t + beta * (0.5 * x_t + s_hat);
  if (noise.size() > 0) {
    require(noise.size() == x_t.size(), "dimension_mismatch", "noise and state dimensions differ");
    next += std::sqrt(beta) * noise;
  }
  return next;
}

Vector ancestral_step(const Vector& x_t, const Vector& s_hat, int t, const Schedule& sched,
                      Rng& rng, bool deterministic_last_step) {
  const double beta = sched.beta(t);
  require(x_t.size() == s_hat.size(), "dimension_mismatch", "score and state dimensions differ");
  if (t == 1 && deterministic_last_step) return reverse_update(x_t, s_hat, beta, Vector());
  return reverse_update(x_t, s_hat, beta, rng.normal_vector(x_t.size()));
}

}  // namespace rdp
