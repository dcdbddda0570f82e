#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rdp/corruption.hpp"
#include "test_util.hpp"

using namespace rdp;

TEST_SUITE("corruption") {
  TEST_CASE("Student-t calibration") {
    CHECK(student_t_scale(2.5, 0.05) == doctest::Approx(0.05 * std::sqrt(0.2)).epsilon(1e-15));
    CHECK(student_t_scale(2.5, 0.05) == doctest::Approx(0.022360).epsilon(1e-5));
    Rng rng(1);
    const int n = 1000000;
    const Corrupted c = corrupt(Vector::Zero(n), StudentTNoise{2.5, 0.05}, rng);
    std::vector<double> v(c.y.data(), c.y.data() + n);
    CHECK(std::abs(std::sqrt(test::sample_var(v)) - 0.05) < 0.01 * 0.05);
    CHECK(std::all_of(c.outlier_mask.begin(), c.outlier_mask.end(), [](int m) { return m == 0; }));
  }

  TEST_CASE("Student-t with finite fourth moment matches sigma within 3 standard errors") {
    // nu = 6 keeps the variance estimator's standard error finite.
    Rng rng(2);
    const int n = 1000000;
    const double sigma = 0.05, nu = 6.0;
    const Corrupted c = corrupt(Vector::Zero(n), StudentTNoise{nu, sigma}, rng);
    std::vector<double> v(c.y.data(), c.y.data() + n);
    const double kurt_excess = 6.0 / (nu - 4.0);
    const double se_var = sigma * sigma * std::sqrt((2.0 + kurt_excess) / n);
    CHECK(std::abs(test::sample_var(v) - sigma * sigma) < 3.0 * se_var);
  }

  TEST_CASE("Gaussian noise std") {
    Rng rng(3);
    const int n = 200000;
    const Corrupted c = corrupt(Vector::Constant(n, 2.0), GaussianNoise{0.1}, rng);
    std::vector<double> v(c.y.data(), c.y.data() + n);
    CHECK(std::abs(test::sample_mean(v) - 2.0) < 5.0 * 0.1 / std::sqrt(n));
    CHECK(std::abs(test::sample_var(v) - 0.01) < 5.0 * 0.01 * std::sqrt(2.0 / n));
  }

  TEST_CASE("zero-fraction impulsive equals Gaussian") {
    Rng r1(4), r2(4);
    const Vector y = Vector::LinSpaced(50, -1.0, 1.0);
    const Corrupted a = corrupt(y, ImpulsiveNoise{0.05, 0.0, 30.0}, r1);
    const Corrupted b = corrupt(y, GaussianNoise{0.05}, r2);
    CHECK(a.y == b.y);
    CHECK(r1.uniform() == r2.uniform());
  }

  TEST_CASE("impulsive subset size and dominance") {
    Rng rng(5);
    const Vector y = Vector::Zero(1000);
    const Corrupted c = corrupt(y, ImpulsiveNoise{0.05, 0.05, 30.0}, rng);
    CHECK(std::count(c.outlier_mask.begin(), c.outlier_mask.end(), 1) == 50);
    // Rank-sum: P(|marked| > |unmarked|) estimated over all pairs.
    double greater = 0.0, pairs = 0.0;
    for (int i = 0; i < 1000; ++i) {
      if (!c.outlier_mask[i]) continue;
      for (int j = 0; j < 1000; ++j) {
        if (c.outlier_mask[j]) continue;
        greater += std::abs(c.y(i)) > std::abs(c.y(j));
        pairs += 1.0;
      }
    }
    const double auc = greater / pairs;
    // Under no effect AUC ~ 0.5 with sd ~ sqrt((n1+n2+1)/(12 n1 n2)).
    const double sd = std::sqrt((50.0 + 950.0 + 1.0) / (12.0 * 50.0 * 950.0));
    CHECK((auc - 0.5) / sd > 3.0);
  }

  TEST_CASE("outlier count uses the ceiling") {
    CHECK(outlier_count(0.05, 1000) == 50);
    CHECK(outlier_count(0.01, 32) == 1);
    CHECK(outlier_count(0.0, 32) == 0);
    CHECK(outlier_count(1.0, 7) == 7);
    CHECK(outlier_count(0.07, 100) == 7);
  }

  TEST_CASE("outlier coordinates are uniform") {
    const int d = 20, trials = 4000;
    std::vector<double> counts(d, 0.0);
    for (int s = 0; s < trials; ++s) {
      Rng rng(derive_seed(77, static_cast<std::uint64_t>(s)));
      const Corrupted c = corrupt(Vector::Zero(d), ImpulsiveNoise{0.05, 0.1, 30.0}, rng);
      for (int i = 0; i < d; ++i) counts[i] += c.outlier_mask[i];
    }
    const double expected = trials * 2.0 / d;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 36.19);  // chi-square 19 dof, 99%
  }

  TEST_CASE("determinism and independent seeds") {
    const Vector y = Vector::Zero(500);
    Rng a(10), b(10), c(11);
    const Corrupted ca = corrupt(y, GaussianNoise{1.0}, a);
    CHECK(ca.y == corrupt(y, GaussianNoise{1.0}, b).y);
    const Corrupted cc = corrupt(y, GaussianNoise{1.0}, c);
    const double corr = ca.y.dot(cc.y) / (ca.y.norm() * cc.y.norm());
    CHECK(std::abs(corr) < 4.0 / std::sqrt(500.0));
  }

  TEST_CASE("uniform replacement") {
    Rng rng(12);
    const Corrupted c = corrupt(Vector::Zero(100), UniformReplacementNoise{0.01, 0.1, 5.0, 6.0}, rng);
    for (int i = 0; i < 100; ++i) {
      if (c.outlier_mask[i]) {
        CHECK(c.y(i) >= 5.0);
        CHECK(c.y(i) <= 6.0);
      }
    }
    CHECK(std::count(c.outlier_mask.begin(), c.outlier_mask.end(), 1) == 10);
  }

  TEST_CASE("invalid schemes") {
    Rng rng(0);
    const Vector y = Vector::Zero(3);
    CHECK_THROWS_AS(corrupt(y, StudentTNoise{2.0, 0.1}, rng), Error);
    CHECK_THROWS_AS(corrupt(y, GaussianNoise{0.0}, rng), Error);
    CHECK_THROWS_AS(corrupt(y, ImpulsiveNoise{0.1, 1.5, 30.0}, rng), Error);
    CHECK_THROWS_AS(corrupt(y, ImpulsiveNoise{0.1, 0.1, 0.5}, rng), Error);
  }
}
