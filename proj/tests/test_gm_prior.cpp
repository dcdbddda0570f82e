#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rdp/gaussian_mixture.hpp"
#include "rdp/rng.hpp"
#include "rdp/schedule.hpp"
#include "rdp/score_source.hpp"
#include "rdp/tweedie.hpp"
#include "test_util.hpp"

using namespace rdp;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

GaussianMixture standard_normal(int d) {
  return GaussianMixture({1.0}, {{Vector::Zero(d), Covariance::diagonal(Vector::Ones(d))}});
}

// Two dense and one diagonal component in 3D.
GaussianMixture mixed_gm() {
  Matrix s1(3, 3), s2(3, 3);
  s1 << 1.0, 0.3, 0.1, 0.3, 0.8, -0.2, 0.1, -0.2, 0.5;
  s2 << 0.4, 0.05, 0.0, 0.05, 0.6, 0.1, 0.0, 0.1, 1.2;
  return GaussianMixture({0.5, 0.3, 0.2}, {{vec({1.0, 0.0, -1.0}), Covariance::dense(s1)},
                                           {vec({-2.0, 1.0, 0.5}), Covariance::dense(s2)},
                                           {vec({0.0, -1.5, 2.0}), Covariance::diagonal(vec({0.3, 0.9, 0.2}))}});
}

// Independent log density: direct sum of dense Gaussian pdfs.
double oracle_log_density(const GaussianMixture& gm, const Vector& x) {
  double p = 0.0;
  for (std::size_t k = 0; k < gm.size(); ++k) {
    const Matrix s = gm.components()[k].cov.dense_matrix();
    const Vector d = x - gm.components()[k].mean;
    const double quad = d.dot(s.inverse() * d);
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * x.size()) / std::sqrt(s.determinant());
    p += gm.weights()[k] * norm * std::exp(-0.5 * quad);
  }
  return std::log(p);
}

// E[x0 | x_t] by per-component Gaussian conditioning.
Vector oracle_posterior_mean(const GaussianMixture& gm, double ab, const Vector& xt) {
  const Eigen::Index d = xt.size();
  const Matrix eye = Matrix::Identity(d, d);
  std::vector<double> logw;
  std::vector<Vector> means;
  for (std::size_t k = 0; k < gm.size(); ++k) {
    const Matrix s = gm.components()[k].cov.dense_matrix();
    const Vector mu = gm.components()[k].mean;
    const Matrix m = ab * s + (1.0 - ab) * eye;
    const Vector diff = xt - std::sqrt(ab) * mu;
    logw.push_back(std::log(gm.weights()[k]) - 0.5 * std::log(m.determinant()) - 0.5 * diff.dot(m.inverse() * diff));
    means.push_back(mu + std::sqrt(ab) * s * m.inverse() * diff);
  }
  double top = logw[0];
  for (double v : logw) top = std::max(top, v);
  double z = 0.0;
  for (double& v : logw) z += (v = std::exp(v - top));
  Vector out = Vector::Zero(d);
  for (std::size_t k = 0; k < gm.size(); ++k) out += logw[k] / z * means[k];
  return out;
}

}  // namespace

TEST_SUITE("gm_prior") {
  TEST_CASE("construction validation") {
    CHECK_THROWS_AS(GaussianMixture({0.5, 0.6}, {{Vector::Zero(1), Covariance::diagonal(Vector::Ones(1))},
                                                 {Vector::Zero(1), Covariance::diagonal(Vector::Ones(1))}}),
                    Error);
    CHECK_THROWS_AS(GaussianMixture({0.5, 0.5}, {{Vector::Zero(1), Covariance::diagonal(Vector::Ones(1))},
                                                 {Vector::Zero(2), Covariance::diagonal(Vector::Ones(2))}}),
                    Error);
    Matrix asym(2, 2);
    asym << 1.0, 0.2, 0.1, 1.0;
    CHECK_THROWS_AS(Covariance::dense(asym), Error);
    Matrix indef(2, 2);
    indef << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(Covariance::dense(indef), Error);
    CHECK_THROWS_AS(Covariance::diagonal(vec({1.0, 0.0})), Error);
  }

  TEST_CASE("log density against direct evaluation") {
    const GaussianMixture gm = mixed_gm();
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
      const Vector x = 1.5 * rng.normal_vector(3);
      CHECK(gm.log_density(x) == doctest::Approx(oracle_log_density(gm, x)).epsilon(1e-10));
    }
  }

  TEST_CASE("single Gaussian score closed form") {
    Matrix s(2, 2);
    s << 0.8, 0.3, 0.3, 0.5;
    const Vector mu = vec({0.5, -1.0});
    const GaussianMixture gm({1.0}, {{mu, Covariance::dense(s)}});
    const Vector x = vec({0.1, 0.7});
    CHECK(test::rel_err(gm.score(x), Vector(-s.inverse() * (x - mu))) < 1e-12);
  }

  TEST_CASE("score matches finite differences of the log density") {
    const GaussianMixture gm = mixed_gm();
    const Schedule sched = Schedule::linear(1e-4, 0.02, 1000);
    Rng rng(7);
    for (int t : {0, 50, 400, 1000}) {
      const GaussianMixture m = t == 0 ? gm : gm_marginal_at_t(gm, sched, t);
      for (int i = 0; i < 10; ++i) {
        const Vector x = 1.5 * rng.normal_vector(3);
        const Vector fd = test::fd_gradient([&](const Vector& z) { return m.log_density(z); }, x);
        CHECK(test::rel_err(m.score(x), fd) < 1e-5);
      }
    }
  }

  TEST_CASE("Hessian-vector product matches finite differences of the score") {
    const GaussianMixture gm = mixed_gm();
    Rng rng(8);
    for (int i = 0; i < 10; ++i) {
      const Vector x = rng.normal_vector(3);
      const Vector v = rng.normal_vector(3);
      const Vector fd = test::fd_directional([&](const Vector& z) { return gm.score(z); }, x, v);
      CHECK(test::rel_err(gm.hessian_vector(gm.score_detail(x), v), fd) < 1e-6);
      const Matrix h = gm.hessian(x);
      CHECK((h - h.transpose()).norm() < 1e-12);
    }
  }

  TEST_CASE("far-apart components stay finite") {
    const GaussianMixture gm({0.5, 0.5}, {{vec({-200.0}), Covariance::diagonal(vec({0.01}))},
                                          {vec({200.0}), Covariance::diagonal(vec({0.01}))}});
    const Vector x = vec({150.0});
    CHECK(std::isfinite(gm.log_density(x)));
    CHECK(gm.score(x).allFinite());
    CHECK(gm.score(x)(0) == doctest::Approx(-(150.0 - 200.0) / 0.01).epsilon(1e-9));
  }

  TEST_CASE("symmetric mixture has zero score at the midpoint") {
    const GaussianMixture gm({0.5, 0.5}, {{vec({-1.0, 0.0}), Covariance::diagonal(vec({0.5, 0.5}))},
                                          {vec({1.0, 0.0}), Covariance::diagonal(vec({0.5, 0.5}))}});
    CHECK(gm.score(vec({0.0, 0.0})).norm() < 1e-15);
  }

  TEST_CASE("marginal at t") {
    const Schedule sched = Schedule::linear(1e-4, 0.02, 1000);
    const GaussianMixture sn = standard_normal(3);
    const GaussianMixture m = gm_marginal_at_t(sn, sched, 500);
    CHECK(m.components()[0].mean.norm() == 0.0);
    CHECK((m.components()[0].cov.dense_matrix() - Matrix::Identity(3, 3)).norm() < 1e-15);

    const GaussianMixture gm = mixed_gm();
    const GaussianMixture terminal = gm_marginal_at_t(gm, sched, 1000);
    CHECK((terminal.covariance() - Matrix::Identity(3, 3)).norm() < 1e-3);

    // Per-component marginals assembled by hand agree field-wise.
    const double ab = sched.alpha_bar(123);
    std::vector<GaussianComponent> comps;
    for (const auto& c : gm.components()) comps.push_back({std::sqrt(ab) * c.mean, c.cov.diffused(ab)});
    CHECK(gm_marginal_at_t(gm, sched, 123) == GaussianMixture(gm.weights(), comps));
  }

  TEST_CASE("1D marginal against forward_perturb draws") {
    const Schedule sched = Schedule::from_betas({0.75});
    const GaussianMixture gm({0.4, 0.6}, {{vec({-2.0}), Covariance::diagonal(vec({0.3}))},
                                          {vec({1.0}), Covariance::diagonal(vec({0.6}))}});
    const GaussianMixture m = gm_marginal_at_t(gm, sched, 1);
    CHECK(m.components()[0].mean(0) == doctest::Approx(-1.0));
    CHECK(m.components()[1].cov.eigenvalues()(0) == doctest::Approx(0.25 * 0.6 + 0.75));

    Rng rng(4);
    const int n = 200000;
    std::vector<double> xs;
    for (const Vector& x0 : gm.sample(n, rng)) xs.push_back(forward_perturb(x0, 1, sched, rng)(0));
    CHECK(test::sample_mean(xs) == doctest::Approx(m.mean()(0)).epsilon(0.02));
    CHECK(test::sample_var(xs) == doctest::Approx(m.covariance()(0, 0)).epsilon(0.02));
    // CDF comparison at a few points (two-sample KS-style bound).
    for (double q : {-1.5, -0.5, 0.0, 0.8}) {
      double emp = 0.0;
      for (double x : xs) emp += x <= q;
      emp /= n;
      double cdf = 0.0;
      for (std::size_t k = 0; k < m.size(); ++k) {
        const double mu = m.components()[k].mean(0);
        const double sd = std::sqrt(m.components()[k].cov.eigenvalues()(0));
        cdf += m.weights()[k] * 0.5 * std::erfc(-(q - mu) / (sd * std::sqrt(2.0)));
      }
      CHECK(std::abs(emp - cdf) < 0.005);
    }
  }

  TEST_CASE("Tweedie denoiser matches conditioning for every component count") {
    const Schedule sched = Schedule::linear(1e-4, 0.02, 1000);
    const GaussianMixture gm = mixed_gm();
    Rng rng(9);
    for (std::size_t k = 1; k <= gm.size(); ++k) {
      std::vector<double> w(gm.weights().begin(), gm.weights().begin() + static_cast<long>(k));
      double s = 0.0;
      for (double v : w) s += v;
      for (double& v : w) v /= s;
      const GaussianMixture sub(w, {gm.components().begin(), gm.components().begin() + static_cast<long>(k)});
      const AnalyticGmScore src(sub, sched);
      for (int t : {1, 100, 600, 1000}) {
        const Vector xt = rng.normal_vector(3);
        const Vector est = tweedie_denoise(xt, src.evaluate(xt, t).score, t, sched);
        CHECK((est - oracle_posterior_mean(sub, sched.alpha_bar(t), xt)).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }

  TEST_CASE("Tweedie denoiser trivial cases") {
    const Schedule sched = Schedule::linear(1e-4, 0.02, 1000);
    const Vector xt = vec({0.3, -0.7});
    const int t = 250;
    CHECK(test::rel_err(tweedie_denoise(xt, -xt, t, sched), Vector(std::sqrt(sched.alpha_bar(t)) * xt)) < 1e-14);
    const Schedule tiny = Schedule::from_betas({1e-300});
    CHECK((tweedie_denoise(xt, vec({5.0, 5.0}), 1, tiny) - xt).norm() < 1e-12);
  }

  TEST_CASE("conjugate posterior N(0,I), A=I, sigma=1") {
    const Vector y = vec({1.4, -0.6});
    const GaussianMixture post = gm_posterior_linear(standard_normal(2), Matrix::Identity(2, 2), 1.0, y);
    CHECK(test::rel_err(post.mean(), Vector(y / 2.0)) < 1e-14);
    CHECK((post.covariance() - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-14);
  }

  TEST_CASE("posterior density equals normalized likelihood times prior on a 1D grid") {
    const GaussianMixture gm({0.3, 0.7}, {{vec({-1.0}), Covariance::diagonal(vec({0.2}))},
                                          {vec({1.5}), Covariance::diagonal(vec({0.5}))}});
    Matrix a(1, 1);
    a << 0.8;
    const double sigma = 0.4;
    const Vector y = vec({0.3});
    const GaussianMixture post = gm_posterior_linear(gm, a, sigma, y);
    const int n = 20001;
    const double lo = -8.0, hi = 8.0, h = (hi - lo) / (n - 1);
    std::vector<double> un(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = lo + i * h;
      const double r = y(0) - a(0, 0) * x;
      un[i] = std::exp(gm.log_density(vec({x})) - r * r / (2 * sigma * sigma));
      z += (i == 0 || i == n - 1 ? 0.5 : 1.0) * un[i] * h;
    }
    for (int i = 0; i < n; i += 1000) {
      const double x = lo + i * h;
      const double expected = un[i] / z;
      if (expected < 1e-12) continue;
      CHECK(std::exp(post.log_density(vec({x}))) == doctest::Approx(expected).epsilon(1e-6));
    }
  }

  TEST_CASE("evidence concentrates on the matching component") {
    const GaussianMixture gm({0.5, 0.5}, {{vec({-10.0, 0.0}), Covariance::diagonal(vec({0.5, 0.5}))},
                                          {vec({10.0, 0.0}), Covariance::diagonal(vec({0.5, 0.5}))}});
    const GaussianMixture post = gm_posterior_linear(gm, Matrix::Identity(2, 2), 0.3, vec({-9.5, 0.2}));
    CHECK(post.weights()[0] > 1.0 - 1e-12);
  }

  TEST_CASE("conditional score: finite differences, conditional Tweedie, vanishing likelihood") {
    const Schedule sched = Schedule::linear(1e-4, 0.02, 1000);
    const GaussianMixture gm = mixed_gm();
    Matrix a(2, 3);
    a << 1.0, 0.5, 0.0, -0.3, 0.2, 1.0;
    const double sigma = 0.5;
    const Vector y = vec({0.4, -0.8});
    const GaussianMixture post = gm_posterior_linear(gm, a, sigma, y);
    Rng rng(10);
    for (int t : {20, 300, 900}) {
      const GaussianMixture pt = gm_marginal_at_t(post, sched, t);
      const Vector xt = rng.normal_vector(3);
      const Vector s = gm_conditional_score(gm, a, sigma, y, t, sched, xt);
      const Vector fd = test::fd_gradient([&](const Vector& z) { return pt.log_density(z); }, xt);
      CHECK(test::rel_err(s, fd) < 1e-6);
      const double ab = sched.alpha_bar(t);
      const Vector cond_mean = oracle_posterior_mean(post, ab, xt);
      const Vector via_mean = -(xt - std::sqrt(ab) * cond_mean) / (1.0 - ab);
      CHECK((s - via_mean).norm() < 1e-8 * std::max(1.0, s.norm()));
      const Vector far = gm_conditional_score(gm, a, 1e8, y, t, sched, xt);
      CHECK(test::rel_err(far, gm_marginal_at_t(gm, sched, t).score(xt)) < 1e-9);
    }
  }

  TEST_CASE("sampling") {
    Rng rng(12);
    Matrix s(2, 2);
    s << 0.8, 0.3, 0.3, 0.5;
    const GaussianMixture single({1.0}, {{vec({1.0, -2.0}), Covariance::dense(s)}});
    const int n = 50000;
    Vector mean = Vector::Zero(2);
    for (const Vector& x : single.sample(n, rng)) mean += x;
    mean /= n;
    CHECK(std::abs(mean(0) - 1.0) < 5.0 * std::sqrt(0.8 / n));
    CHECK(std::abs(mean(1) + 2.0) < 5.0 * std::sqrt(0.5 / n));

    const GaussianMixture degenerate({1.0, 0.0}, {{vec({-50.0}), Covariance::diagonal(vec({1.0}))},
                                                  {vec({50.0}), Covariance::diagonal(vec({1.0}))}});
    for (const Vector& x : degenerate.sample(2000, rng)) CHECK(x(0) < 0.0);

    // Chi-square on component frequencies (well separated, 2 dof, 99% level 9.21).
    const GaussianMixture three({0.2, 0.5, 0.3}, {{vec({-100.0}), Covariance::diagonal(vec({1.0}))},
                                                   {vec({0.0}), Covariance::diagonal(vec({1.0}))},
                                                   {vec({100.0}), Covariance::diagonal(vec({1.0}))}});
    std::vector<double> counts(3, 0.0);
    const int m = 30000;
    for (const Vector& x : three.sample(m, rng)) counts[x(0) < -50 ? 0 : (x(0) > 50 ? 2 : 1)] += 1.0;
    double chi2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double e = m * three.weights()[k];
      chi2 += (counts[k] - e) * (counts[k] - e) / e;
    }
    CHECK(chi2 < 9.21);

    Rng r1(99), r2(99);
    CHECK(gm_sample(three, 10, r1) == gm_sample(three, 10, r2));
  }
}
