#pragma once

#include <memory>

#include "rdp/types.hpp"

namespace rdp {

/// Symmetric positive-definite covariance held in its eigenbasis,
/// Sigma = Q diag(lambda) Q^T. Diagonal covariances store no basis (Q = I).
///
/// The eigenbasis is shared between a covariance and everything derived from
/// it by `diffused`, since a VP perturbation only moves the eigenvalues.
class Covariance {
 public:
  static Covariance diagonal(Vector variances);
  /// Symmetrizes `sigma` and rejects it unless the smallest eigenvalue is > 0.
  static Covariance dense(const Matrix& sigma);

  Eigen::Index dim() const { return eigenvalues_.size(); }
  bool is_diagonal() const { return basis_ == nullptr; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  /// Identity-equivalent null for diagonal covariances.
  const std::shared_ptr<const Matrix>& basis() const { return basis_; }

  Matrix dense_matrix() const;
  Matrix precision_matrix() const;
  double log_det() const;

  /// Coordinates in the eigenbasis, Q^T v.
  Vector to_eigen(const Vector& v) const;
  /// Q c.
  Vector from_eigen(const Vector& c) const;

  /// Sigma^{-1} v.
  Vector solve(const Vector& v) const;
  /// Sigma^{1/2} z, for sampling.
  Vector sqrt_apply(const Vector& z) const;

  /// alpha_bar * Sigma + (1 - alpha_bar) I.
  Covariance diffused(double alpha_bar) const;

  bool operator==(const Covariance& other) const;

 private:
  Covariance(Vector eigenvalues, std::shared_ptr<const Matrix> basis);

  Vector eigenvalues_;
  std::shared_ptr<const Matrix> basis_;
};

}  // namespace rdp
