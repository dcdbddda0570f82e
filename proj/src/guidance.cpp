#include "rdp/guidance.hpp"

#include <cmath>
#include <vector>

#include "rdp/tweedie.hpp"

namespace rdp {
namespace {

struct Denoised {
  ScoreEval eval;
  Vector x0_hat;
};

Denoised denoise(const Vector& x_t, int t, const Problem& problem) {
  require(x_t.size() == problem.score->dim(), "dimension_mismatch", "state length does not match the score source");
  Denoised d{problem.score->evaluate(x_t, t), {}};
  d.x0_hat = tweedie_denoise(x_t, d.eval.score, t, problem.sched);
  return d;
}

void require_finite_residual(const Vector& r, int t) {
  require(r.allFinite(), "non_finite_residual", "non-finite measurement residual at step " + std::to_string(t));
}

// Measurement-space gradient of the weighted log-likelihood in the residual's
// prediction, i.e. d/d(y_hat) of -sum w_i r_i^2 / (2 sigma^2).
Vector weighted_residual_gradient(const WeightFn& wf, const Vector& r, const Vector& w, double sigma_y,
                                  bool differentiate) {
  if (differentiate) return psi_vector(wf, r, sigma_y);
  return r.cwiseProduct(w) / (sigma_y * sigma_y);
}

double weighted_log_lik(const Vector& r, const Vector* w, double sigma_y) {
  const double s2 = 2.0 * sigma_y * sigma_y;
  if (w == nullptr) return -r.array().square().sum() / s2;
  return -(w->array() * r.array().square()).sum() / s2;
}

}  // namespace

Problem make_problem(std::shared_ptr<const ScoreSource> score, std::shared_ptr<const ForwardModel> model,
                     Vector y, double sigma_y, Schedule sched) {
  require(score && model, "invalid_problem", "score source and forward model are required");
  require(model->input_dim() == score->dim(), "dimension_mismatch", "forward model input does not match state length");
  require(model->output_dim() == y.size(), "dimension_mismatch", "measurement length does not match forward model");
  require(std::isfinite(sigma_y) && sigma_y > 0.0, "invalid_problem", "sigma_y must be positive");
  require(y.allFinite(), "invalid_measurement", "measurement has non-finite entries");
  Problem p{std::move(score), std::move(model), std::move(y), sigma_y, std::move(sched), nullptr};
  if (p.model->is_linear()) p.svd = std::make_shared<const Svd>(p.model->svd());
  return p;
}

Vector tweedie_vjp(const ScoreEval& eval, const Vector& u, int t, const Schedule& sched, JacobianMode mode) {
  const double ab = sched.alpha_bar(t);
  const bool have_hvp = static_cast<bool>(eval.hessian_vector);
  require(mode != JacobianMode::kExact || have_hvp, "missing_hessian",
          "exact Jacobian requested but the score source has no Hessian-vector product");
  if (mode == JacobianMode::kSurrogate || !have_hvp) return u / std::sqrt(ab);
  return (u + (1.0 - ab) * eval.hessian_vector(u)) / std::sqrt(ab);
}

Guidance rdp_guidance(const Vector& x_t, int t, const Problem& problem, const std::optional<WeightSpec>& weight,
                      const GuidanceOptions& options) {
  const Denoised d = denoise(x_t, t, problem);
  Guidance g;
  g.score = d.eval.score;
  g.x0_hat = d.x0_hat;
  g.residuals = problem.y - problem.model->apply(d.x0_hat);
  require_finite_residual(g.residuals, t);
  Vector meas;
  if (weight) {
    const WeightFn wf = resolve(*weight, g.residuals);
    g.threshold = threshold(wf);
    g.weights = weights(wf, g.residuals);
    meas = weighted_residual_gradient(wf, g.residuals, g.weights, problem.sigma_y, options.differentiate_weights);
  } else {
    meas = g.residuals / (problem.sigma_y * problem.sigma_y);
  }
  g.guidance = tweedie_vjp(d.eval, problem.model->vjp(d.x0_hat, meas), t, problem.sched, options.jacobian);
  return g;
}

LgdGuidance lgd_guidance(const Vector& x_t, int t, const Problem& problem, const std::optional<WeightSpec>& weight,
                         const LgdOptions& lgd, Rng& rng, const GuidanceOptions& options) {
  require(lgd.n_mc >= 1, "invalid_config", "lgd_n_mc must be at least 1");
  require(lgd.kappa >= 0.0, "invalid_config", "lgd kappa must be non-negative");
  const Denoised d = denoise(x_t, t, problem);
  const double ab = problem.sched.alpha_bar(t);
  const double rho = std::sqrt(lgd.kappa * (1.0 - ab) / ab);
  const auto n = static_cast<std::size_t>(lgd.n_mc);

  std::vector<Vector> x0(n, d.x0_hat);
  if (rho > 0.0) {
    for (auto& x : x0) x += rho * rng.normal_vector(x.size());
  }
  std::vector<Vector> resid(n);
  Vector mean_pred = Vector::Zero(problem.y.size());
  for (std::size_t j = 0; j < n; ++j) {
    const Vector pred = problem.model->apply(x0[j]);
    resid[j] = problem.y - pred;
    require_finite_residual(resid[j], t);
    mean_pred += pred;
  }
  mean_pred /= static_cast<double>(n);

  LgdGuidance g;
  g.score = d.eval.score;
  g.x0_hat = d.x0_hat;
  g.residuals = problem.y - mean_pred;
  std::optional<WeightFn> wf;
  if (weight) {
    wf = resolve(*weight, g.residuals);
    g.threshold = threshold(*wf);
    g.weights = weights(*wf, g.residuals);
  }

  std::vector<double> ll(n);
  for (std::size_t j = 0; j < n; ++j) ll[j] = weighted_log_lik(resid[j], wf ? &g.weights : nullptr, problem.sigma_y);
  double top = ll[0];
  for (double v : ll) top = std::max(top, v);
  double z = 0.0;
  std::vector<double> soft(n);
  for (std::size_t j = 0; j < n; ++j) z += soft[j] = std::exp(ll[j] - top);
  g.surrogate = top + std::log(z / static_cast<double>(n));
  g.mean_log_lik = 0.0;
  for (double v : ll) g.mean_log_lik += v / static_cast<double>(n);

  Vector grad_x0 = Vector::Zero(d.x0_hat.size());
  for (std::size_t j = 0; j < n; ++j) {
    const Vector meas = wf ? weighted_residual_gradient(*wf, resid[j], g.weights, problem.sigma_y,
                                                        options.differentiate_weights)
                           : Vector(resid[j] / (problem.sigma_y * problem.sigma_y));
    grad_x0 += (soft[j] / z) * problem.model->vjp(x0[j], meas);
  }
  g.guidance = tweedie_vjp(d.eval, grad_x0, t, problem.sched, options.jacobian);
  return g;
}

double pigdm_variance(PigdmVariance rule, int t, const Schedule& sched) {
  const double ab = sched.alpha_bar(t);
  return rule == PigdmVariance::kOneMinusAlphaBar ? 1.0 - ab : (1.0 - ab) / ab;
}

Guidance pigdm_guidance(const Vector& x_t, int t, const Problem& problem, const std::optional<WeightSpec>& weight,
                        PigdmVariance rule, const GuidanceOptions& options) {
  require(problem.model->is_linear() && problem.svd, "unsupported_operation",
          "spectral guidance needs a linear forward model");
  const Denoised d = denoise(x_t, t, problem);
  Guidance g;
  g.score = d.eval.score;
  g.x0_hat = d.x0_hat;
  g.residuals = problem.y - problem.model->apply(d.x0_hat);
  require_finite_residual(g.residuals, t);
  Vector meas = g.residuals;
  if (weight) {
    const WeightFn wf = resolve(*weight, g.residuals);
    g.threshold = threshold(wf);
    g.weights = weights(wf, g.residuals);
    meas = g.residuals.cwiseProduct(g.weights);
  }
  const Svd& svd = *problem.svd;
  const double r2 = pigdm_variance(rule, t, problem.sched);
  const double s2 = problem.sigma_y * problem.sigma_y;
  const Vector gain = svd.singular_values.array() / (r2 * svd.singular_values.array().square() + s2);
  const Vector grad_x0 = svd.v * gain.cwiseProduct(svd.u.transpose() * meas);
  g.guidance = tweedie_vjp(d.eval, grad_x0, t, problem.sched, options.jacobian);
  return g;
}

}  // namespace rdp
