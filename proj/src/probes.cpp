#include "rdp/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "rdp/distances.hpp"
#include "rdp/metrics.hpp"

namespace rdp {

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double level) {
  require(x.size() == y.size(), "dimension_mismatch", "slope fit needs paired points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const auto n = static_cast<int>(lx.size());
  require(n >= 4, "degenerate_curve", "slope fit needs at least 4 positive points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, "degenerate_curve", "slope fit needs distinct abscissae");
  SlopeFit fit;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += e * e;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  const boost::math::students_t dist(n - 2);
  const double tq = boost::math::quantile(dist, 0.5 + level / 2.0);
  fit.ci_low = fit.slope - tq * se;
  fit.ci_high = fit.slope + tq * se;
  return fit;
}

double last_decade_growth(const ProbeCurve& curve) {
  require(!curve.abscissa.empty(), "degenerate_curve", "empty curve");
  const double cut = curve.abscissa.back() / 10.0;
  double all = 0.0, head = 0.0;
  for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
    all = std::max(all, curve.ordinate[i]);
    if (curve.abscissa[i] <= cut) head = std::max(head, curve.ordinate[i]);
  }
  if (head == 0.0) return all == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return all / head;
}

double top_decade_max_over_median(const ProbeCurve& curve) {
  require(!curve.abscissa.empty(), "degenerate_curve", "empty curve");
  const double cut = curve.abscissa.back() / 10.0;
  std::vector<double> top;
  for (std::size_t i = 0; i < curve.abscissa.size(); ++i)
    if (curve.abscissa[i] >= cut) top.push_back(curve.ordinate[i]);
  const double med = quantile(top, 0.5);
  const double mx = *std::max_element(top.begin(), top.end());
  if (med == 0.0) return mx == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return mx / med;
}

namespace {

void require_increasing(const std::vector<double>& v) {
  require(!v.empty(), "invalid_argument", "probe needs at least one abscissa value");
  for (std::size_t i = 1; i < v.size(); ++i)
    require(v[i] > v[i - 1], "invalid_argument", "probe abscissa must be strictly increasing");
}

SlopeFit try_fit(const ProbeCurve& c) {
  try {
    return fit_loglog_slope(c.abscissa, c.ordinate);
  } catch (const Error&) {
    return {};
  }
}

double divergence(const std::vector<Vector>& a, const std::vector<Vector>& b, const PifOptions& options,
                  std::uint64_t proj_seed) {
  require(a.size() >= 2 && b.size() >= 2, "degenerate_samples", "divergence needs at least 2 draws per set");
  if (options.proxy == DivergenceProxy::kGaussianKl) {
    const SampleMoments ma = sample_moments(a), mb = sample_moments(b);
    return gaussian_kl(ma.mean, ma.cov, mb.mean, mb.cov);
  }
  Rng rng(proj_seed);
  return sliced_w2(a, b, options.n_proj, rng);
}

std::vector<Vector> draws_or_throw(const ChainsResult& r) {
  require(r.failures.empty(), "chain_failure", "probe chain failed: " + (r.failures.empty() ? "" : r.failures[0].message));
  return r.successful();
}

}  // namespace

std::vector<ProbeCurve> guidance_sup_probe(const std::vector<NamedWeight>& weights, const Problem& problem,
                                           const Vector& x_t, int t, Eigen::Index coord,
                                           const std::vector<double>& magnitudes) {
  require_increasing(magnitudes);
  const Guidance base = rdp_guidance(x_t, t, problem, std::nullopt);
  const Vector y_hat = problem.model->apply(base.x0_hat);
  require(coord >= 0 && coord < y_hat.size(), "invalid_argument", "probe coordinate out of range");
  std::vector<ProbeCurve> curves;
  for (const auto& w : weights) {
    ProbeCurve c;
    c.label = w.name;
    c.abscissa = magnitudes;
    Problem p = problem;
    for (double m : magnitudes) {
      p.y = y_hat;
      p.y(coord) += m;
      c.ordinate.push_back(rdp_guidance(x_t, t, p, w.spec).guidance.norm());
    }
    c.fit = try_fit(c);
    curves.push_back(std::move(c));
  }
  return curves;
}

PifResult pif_probe(const SamplerConfig& plain, const SamplerConfig& robust, const Problem& clean,
                    const std::vector<Eigen::Index>& coords, const std::vector<double>& magnitudes,
                    const PifOptions& options) {
  require_increasing(magnitudes);
  for (Eigen::Index i : coords)
    require(i >= 0 && i < clean.y.size(), "invalid_argument", "corruption coordinate out of range");
  PifResult out;
  out.plain.label = sampler_label(plain);
  out.robust.label = sampler_label(robust) + "-robust";
  const auto run = [&](const SamplerConfig& cfg, const Problem& p) {
    return draws_or_throw(run_chains(cfg, p, options.n_chains, options.master_seed, options.n_threads));
  };
  const std::vector<Vector> ref_plain = run(plain, clean);
  const std::vector<Vector> ref_robust = run(robust, clean);
  const std::uint64_t proj_seed = derive_seed(options.master_seed, 0xd1f);
  for (double m : magnitudes) {
    Problem p = clean;
    for (Eigen::Index i : coords) p.y(i) += m;
    out.plain.abscissa.push_back(m);
    out.robust.abscissa.push_back(m);
    out.plain.ordinate.push_back(divergence(run(plain, p), ref_plain, options, proj_seed));
    out.robust.ordinate.push_back(divergence(run(robust, p), ref_robust, options, proj_seed));
  }
  out.plain.fit = try_fit(out.plain);
  out.robust.fit = try_fit(out.robust);
  return out;
}

ProbeCurve imq_gap_curve(const std::vector<double>& c_values, double r_bound, double sigma_y, int n_grid) {
  require_increasing(c_values);
  require(r_bound > 0.0 && n_grid >= 2, "invalid_argument", "gap curve needs a positive bound and a grid");
  ProbeCurve c;
  c.label = "imq_gap";
  c.abscissa = c_values;
  for (double cv : c_values) {
    const WeightFn wf = ImqWeight{cv};
    double sup = 0.0;
    for (int k = 0; k < n_grid; ++k) {
      const double r = -r_bound + 2.0 * r_bound * k / (n_grid - 1);
      sup = std::max(sup, std::abs(r / (sigma_y * sigma_y) - psi(wf, r, sigma_y)));
    }
    c.ordinate.push_back(sup);
  }
  c.fit = try_fit(c);
  return c;
}

ProbeCurve sampled_bias_curve(const SamplerConfig& plain, const std::vector<double>& c_values, const Problem& problem,
                              const PifOptions& options) {
  require_increasing(c_values);
  require(!plain.weight, "invalid_config", "bias curve needs an unweighted base sampler");
  const auto run = [&](const SamplerConfig& cfg) {
    return draws_or_throw(run_chains(cfg, problem, options.n_chains, options.master_seed, options.n_threads));
  };
  const std::vector<Vector> base = run(plain);
  const std::uint64_t proj_seed = derive_seed(options.master_seed, 0xb1a5);
  ProbeCurve c;
  c.label = "sampled_bias";
  c.abscissa = c_values;
  for (double cv : c_values) {
    SamplerConfig robust = plain;
    robust.weight = WeightSpec{ImqWeight{cv}, std::nullopt, 1e-8};
    c.ordinate.push_back(divergence(run(robust), base, options, proj_seed));
  }
  c.fit = try_fit(c);
  return c;
}

SignTest sign_test_less(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && !a.empty(), "dimension_mismatch", "sign test needs equal-length paired samples");
  SignTest s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) ++s.wins;
    else if (a[i] > b[i]) ++s.losses;
    else ++s.ties;
  }
  const int n = s.wins + s.losses;
  if (n == 0 || s.wins == 0) {
    s.p_value = 1.0;
    return s;
  }
  const boost::math::binomial dist(n, 0.5);
  s.p_value = boost::math::cdf(boost::math::complement(dist, s.wins - 1));
  return s;
}

}  // namespace rdp
