#pragma once

#include <complex>
#include <string_view>
#include <variant>
#include <vector>

#include "rdp/rng.hpp"
#include "rdp/types.hpp"

namespace rdp {

using ComplexMatrix = Eigen::MatrixXcd;

struct DenseLinearOp {
  Matrix a;
};

/// Keeps the observed entries of x, in index order (d_y = number of ones).
struct MaskOp {
  std::vector<Eigen::Index> observed;
  Eigen::Index input_dim = 0;
};

/// Periodic 2D convolution. `wrapped` is the kernel folded onto the grid with
/// its center at the origin.
struct CircularConvOp {
  Matrix kernel;
  GridShape shape;
  Matrix wrapped;
};

/// y = H (u_in .* x).
struct LinearScatteringOp {
  Matrix h;
  Vector u_in;
};

/// Magnitudes of the orthonormal 2D DFT restricted to the non-redundant half
/// spectrum (columns 0..cols/2), flattened row-major.
struct PhaseRetrievalOp {
  GridShape shape;
  double eps_mag = 1e-8;
  ComplexMatrix row_dft;   // rows x rows
  ComplexMatrix half_dft;  // (cols/2 + 1) x cols
};

struct Svd {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

/// Measurement operator F with forward application and vector-Jacobian products.
class ForwardModel {
 public:
  static ForwardModel dense_linear(Matrix a);
  static ForwardModel mask(const std::vector<int>& binary_mask);
  static ForwardModel circular_conv(Matrix kernel, GridShape shape);
  static ForwardModel linear_scattering(Matrix h, Vector u_in);
  static ForwardModel phase_retrieval(GridShape shape, double eps_mag = 1e-8);

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  bool is_linear() const;
  std::string_view kind() const;

  Vector apply(const Vector& x) const;
  /// J_F(x)^T v.
  Vector vjp(const Vector& x, const Vector& v) const;

  /// Explicit matrix of a linear operator.
  Matrix dense_matrix() const;
  /// Thin SVD of a linear operator; throws for nonlinear variants.
  Svd svd() const;

  using Variant = std::variant<DenseLinearOp, MaskOp, CircularConvOp, LinearScatteringOp, PhaseRetrievalOp>;
  const Variant& op() const { return op_; }

 private:
  explicit ForwardModel(Variant op) : op_(std::move(op)) {}
  Variant op_;
};

/// Normalized, symmetric size x size Gaussian kernel.
Matrix make_gaussian_blur_kernel(double sigma_blur, int size);

/// Synthetic dense propagator H_ij = c / (1 + |q_i - p_j| / decay) between
/// receivers q_i drawn uniformly over the grid's extent and grid points p_j,
/// with c = 1 / sqrt(d_x) so every row norm is at most 1.
Matrix make_scattering_propagator(GridShape shape, double decay, int n_receivers, Rng& rng);

/// Binary mask with round(fraction * d) observed pixels chosen uniformly.
std::vector<int> make_random_mask(GridShape shape, double observed_fraction, Rng& rng);

/// Binary mask that hides one square box covering about `box_fraction` of the
/// grid at a uniformly random location.
std::vector<int> make_box_mask(GridShape shape, double box_fraction, Rng& rng);

}  // namespace rdp
