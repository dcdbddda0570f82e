#include "rdp/robust_weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rdp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sign(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

double mahalanobis_scale(const MahalanobisWeight& m, Eigen::Index i) {
  if (m.scales.size() == 0) return m.default_scale;
  require(i >= 0 && i < m.scales.size(), "dimension_mismatch", "Mahalanobis component index out of range");
  return m.scales(i);
}

void require_positive(double v, const char* what) {
  require(std::isfinite(v) && v > 0.0, "invalid_weight", std::string(what) + " must be positive");
}

}  // namespace

std::string_view weight_name(const WeightFn& wf) {
  return std::visit(Overloaded{
                        [](const UniformWeight&) { return std::string_view("uniform"); },
                        [](const ImqWeight&) { return std::string_view("imq"); },
                        [](const HuberWeight&) { return std::string_view("huber"); },
                        [](const MahalanobisWeight&) { return std::string_view("mahalanobis"); },
                        [](const GlobalScaleWeight&) { return std::string_view("global_scale"); },
                    },
                    wf);
}

void validate(const WeightFn& wf) {
  std::visit(Overloaded{
                 [](const UniformWeight&) {},
                 [](const ImqWeight& w) { require_positive(w.c, "IMQ c"); },
                 [](const HuberWeight& w) { require_positive(w.delta, "Huber delta"); },
                 [](const MahalanobisWeight& w) {
                   require_positive(w.c, "Mahalanobis c");
                   require_positive(w.default_scale, "Mahalanobis default scale");
                   require((w.scales.array() > 0.0).all() && w.scales.allFinite(), "invalid_weight",
                           "Mahalanobis scales must be positive");
                 },
                 [](const GlobalScaleWeight& w) {
                   require_positive(w.c, "global scale c");
                   require_positive(w.eps, "global scale eps");
                 },
             },
             wf);
}

double weight(const WeightFn& wf, double r, Eigen::Index i) {
  return std::visit(Overloaded{
                        [](const UniformWeight&) { return 1.0; },
                        [&](const ImqWeight& w) { return 1.0 / std::sqrt(1.0 + (r / w.c) * (r / w.c)); },
                        [&](const HuberWeight& w) { return std::abs(r) <= w.delta ? 1.0 : w.delta / std::abs(r); },
                        [&](const MahalanobisWeight& w) {
                          const double u = r / (mahalanobis_scale(w, i) * w.c);
                          return 1.0 / std::sqrt(1.0 + u * u);
                        },
                        [&](const GlobalScaleWeight& w) { return w.c / (w.eps + std::abs(r)); },
                    },
                    wf);
}

double weight_deriv(const WeightFn& wf, double r, Eigen::Index i) {
  return std::visit(Overloaded{
                        [](const UniformWeight&) { return 0.0; },
                        [&](const ImqWeight& w) {
                          const double base = 1.0 + (r / w.c) * (r / w.c);
                          return -(r / (w.c * w.c)) / (base * std::sqrt(base));
                        },
                        [&](const HuberWeight& w) {
                          return std::abs(r) <= w.delta ? 0.0 : -w.delta * sign(r) / (r * r);
                        },
                        [&](const MahalanobisWeight& w) {
                          const double k = mahalanobis_scale(w, i) * w.c;
                          const double base = 1.0 + (r / k) * (r / k);
                          return -(r / (k * k)) / (base * std::sqrt(base));
                        },
                        [&](const GlobalScaleWeight& w) {
                          const double d = w.eps + std::abs(r);
                          return -w.c * sign(r) / (d * d);
                        },
                    },
                    wf);
}

double psi(const WeightFn& wf, double r, double sigma_y, Eigen::Index i) {
  require_positive(sigma_y, "sigma_y");
  return (2.0 * r * weight(wf, r, i) + r * r * weight_deriv(wf, r, i)) / (2.0 * sigma_y * sigma_y);
}

RobustReport check_robust_condition(const WeightFn& wf, double r_max, int n_grid) {
  validate(wf);
  require_positive(r_max, "r_max");
  require(n_grid >= 10, "invalid_argument", "robustness grid needs at least 10 points");
  const double lo = std::log(r_max * 1e-9);
  const double hi = std::log(r_max);
  const double cut = r_max / 10.0;
  double rw_all = 0.0, rw_head = 0.0, r2_all = 0.0, r2_head = 0.0;
  for (int k = 0; k < n_grid; ++k) {
    const double r = k + 1 == n_grid ? r_max : std::exp(lo + (hi - lo) * k / (n_grid - 1));
    const double rw = std::abs(r * weight(wf, r));
    const double r2 = std::abs(r * r * weight_deriv(wf, r));
    rw_all = std::max(rw_all, rw);
    r2_all = std::max(r2_all, r2);
    if (r <= cut) {
      rw_head = std::max(rw_head, rw);
      r2_head = std::max(r2_head, r2);
    }
  }
  const auto growth = [](double all, double head) {
    if (head == 0.0) return all == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return all / head;
  };
  RobustReport rep;
  rep.sup_rw = rw_all;
  rep.sup_r2wprime = r2_all;
  rep.growth_rw = growth(rw_all, rw_head);
  rep.growth_r2wprime = growth(r2_all, r2_head);
  rep.robust = rep.growth_rw < 1.05 && rep.growth_r2wprime < 1.05;
  return rep;
}

double adaptive_c(const Vector& abs_residuals, double q, double c_min) {
  require(abs_residuals.size() > 0, "empty_input", "adaptive_c needs at least one residual");
  require(q > 0.0 && q <= 1.0, "invalid_argument", "quantile level must lie in (0, 1]");
  std::vector<double> v(abs_residuals.size());
  for (Eigen::Index i = 0; i < abs_residuals.size(); ++i) v[static_cast<std::size_t>(i)] = std::abs(abs_residuals(i));
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t up = std::min(lo + 1, v.size() - 1);
  const double value = v[lo] + (h - static_cast<double>(lo)) * (v[up] - v[lo]);
  return std::max(value, c_min);
}

double threshold(const WeightFn& wf) {
  return std::visit(Overloaded{
                        [](const UniformWeight&) { return 0.0; },
                        [](const ImqWeight& w) { return w.c; },
                        [](const HuberWeight& w) { return w.delta; },
                        [](const MahalanobisWeight& w) { return w.c; },
                        [](const GlobalScaleWeight& w) { return w.c; },
                    },
                    wf);
}

WeightFn with_threshold(const WeightFn& wf, double c) {
  return std::visit(Overloaded{
                        [](UniformWeight w) -> WeightFn { return w; },
                        [&](ImqWeight w) -> WeightFn { w.c = c; return w; },
                        [&](HuberWeight w) -> WeightFn { w.delta = c; return w; },
                        [&](MahalanobisWeight w) -> WeightFn { w.c = c; return w; },
                        [&](GlobalScaleWeight w) -> WeightFn { w.c = c; return w; },
                    },
                    wf);
}

void validate(const WeightSpec& spec) {
  validate(spec.fn);
  require_positive(spec.c_min, "c_min");
  if (spec.adaptive_q) {
    require(*spec.adaptive_q > 0.0 && *spec.adaptive_q <= 1.0, "invalid_weight", "adaptive q must lie in (0, 1]");
    require(std::holds_alternative<ImqWeight>(spec.fn) || std::holds_alternative<HuberWeight>(spec.fn) ||
                std::holds_alternative<MahalanobisWeight>(spec.fn),
            "invalid_weight", "adaptive threshold applies to imq, huber and mahalanobis weights only");
  }
}

WeightFn resolve(const WeightSpec& spec, const Vector& r) {
  if (!spec.adaptive_q) return spec.fn;
  return with_threshold(spec.fn, adaptive_c(r.cwiseAbs(), *spec.adaptive_q, spec.c_min));
}

Vector weights(const WeightFn& wf, const Vector& r) {
  if (const auto* g = std::get_if<GlobalScaleWeight>(&wf)) {
    return Vector::Constant(r.size(), g->c / (g->eps + r.norm()));
  }
  if (const auto* m = std::get_if<MahalanobisWeight>(&wf)) {
    require(m->scales.size() == 0 || m->scales.size() == r.size(), "dimension_mismatch",
            "Mahalanobis scales must match the residual length");
  }
  Vector w(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) w(i) = weight(wf, r(i), i);
  return w;
}

Vector psi_vector(const WeightFn& wf, const Vector& r, double sigma_y) {
  if (std::holds_alternative<GlobalScaleWeight>(wf)) {
    const double rho = r.norm();
    if (rho == 0.0) return Vector::Zero(r.size());
    return psi(wf, rho, sigma_y) / rho * r;
  }
  Vector out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) out(i) = psi(wf, r(i), sigma_y, i);
  return out;
}

}  // namespace rdp
