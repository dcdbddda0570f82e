#include "rdp/corruption.hpp"

#include <cmath>
#include <numeric>

namespace rdp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_sigma(double sigma_y) {
  require(std::isfinite(sigma_y) && sigma_y > 0.0, "invalid_noise", "sigma_y must be positive");
}

void require_fraction(double p) {
  require(p >= 0.0 && p <= 1.0, "invalid_noise", "outlier fraction must lie in [0, 1]");
}

// Partial Fisher-Yates: first k entries of a uniform random permutation.
std::vector<Eigen::Index> random_subset(Eigen::Index n, Eigen::Index k, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace

void validate(const NoiseScheme& scheme) {
  std::visit(Overloaded{
                 [](const GaussianNoise& s) { require_sigma(s.sigma_y); },
                 [](const StudentTNoise& s) {
                   require_sigma(s.sigma_y);
                   require(s.nu > 2.0, "invalid_noise", "Student-t calibration needs nu > 2");
                 },
                 [](const ImpulsiveNoise& s) {
                   require_sigma(s.sigma_y);
                   require_fraction(s.fraction);
                   require(s.magnitude >= 1.0, "invalid_noise", "impulse magnitude must be at least 1");
                 },
                 [](const UniformReplacementNoise& s) {
                   require_sigma(s.sigma_y);
                   require_fraction(s.fraction);
                   require(s.low < s.high, "invalid_noise", "replacement range must satisfy low < high");
                 },
             },
             scheme);
}

std::string_view scheme_name(const NoiseScheme& scheme) {
  return std::visit(Overloaded{
                        [](const GaussianNoise&) { return std::string_view("gaussian"); },
                        [](const StudentTNoise&) { return std::string_view("student_t"); },
                        [](const ImpulsiveNoise&) { return std::string_view("impulsive"); },
                        [](const UniformReplacementNoise&) { return std::string_view("uniform_replacement"); },
                    },
                    scheme);
}

double nominal_sigma(const NoiseScheme& scheme) {
  return std::visit([](const auto& s) { return s.sigma_y; }, scheme);
}

double student_t_scale(double nu, double sigma_y) {
  require(nu > 2.0, "invalid_noise", "Student-t calibration needs nu > 2");
  return sigma_y * std::sqrt((nu - 2.0) / nu);
}

Eigen::Index outlier_count(double fraction, Eigen::Index d_y) {
  require_fraction(fraction);
  return std::min(d_y, static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(d_y) - 1e-9)));
}

Corrupted corrupt(const Vector& y_star, const NoiseScheme& scheme, Rng& rng) {
  validate(scheme);
  require(y_star.allFinite(), "invalid_measurement", "clean measurement has non-finite entries");
  const Eigen::Index n = y_star.size();
  Corrupted out{y_star, std::vector<int>(static_cast<std::size_t>(n), 0)};
  std::visit(Overloaded{
                 [&](const GaussianNoise& s) { out.y += s.sigma_y * rng.normal_vector(n); },
                 [&](const StudentTNoise& s) {
                   const double scale = student_t_scale(s.nu, s.sigma_y);
                   for (Eigen::Index i = 0; i < n; ++i) out.y(i) += scale * rng.student_t(s.nu);
                 },
                 [&](const ImpulsiveNoise& s) {
                   Vector noise = s.sigma_y * rng.normal_vector(n);
                   const Eigen::Index k = outlier_count(s.fraction, n);
                   if (k > 0) {
                     for (Eigen::Index i : random_subset(n, k, rng)) {
                       noise(i) *= s.magnitude;
                       out.outlier_mask[static_cast<std::size_t>(i)] = 1;
                     }
                   }
                   out.y += noise;
                 },
                 [&](const UniformReplacementNoise& s) {
                   out.y += s.sigma_y * rng.normal_vector(n);
                   const Eigen::Index k = outlier_count(s.fraction, n);
                   if (k > 0) {
                     for (Eigen::Index i : random_subset(n, k, rng)) {
                       out.y(i) = s.low + (s.high - s.low) * rng.uniform();
                       out.outlier_mask[static_cast<std::size_t>(i)] = 1;
                     }
                   }
                 },
             },
             scheme);
  return out;
}

}  // namespace rdp
