#include "rdp/covariance.hpp"

#include <cmath>

namespace rdp {

Covariance::Covariance(Vector eigenvalues, std::shared_ptr<const Matrix> basis)
    : eigenvalues_(std::move(eigenvalues)), basis_(std::move(basis)) {
  require(eigenvalues_.size() > 0, "invalid_covariance", "covariance must have dimension >= 1");
  require(eigenvalues_.allFinite() && eigenvalues_.minCoeff() > 0.0, "invalid_covariance",
          "covariance must be positive definite");
}

Covariance Covariance::diagonal(Vector variances) { return Covariance(std::move(variances), nullptr); }

Covariance Covariance::dense(const Matrix& sigma) {
  require(sigma.rows() == sigma.cols() && sigma.rows() > 0, "invalid_covariance",
          "covariance must be square");
  require(sigma.allFinite(), "invalid_covariance", "covariance has non-finite entries");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, "invalid_covariance",
          "covariance must be symmetric");
  const Matrix sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  require(eig.info() == Eigen::Success, "invalid_covariance", "eigendecomposition failed");
  return Covariance(eig.eigenvalues(), std::make_shared<const Matrix>(eig.eigenvectors()));
}

Matrix Covariance::dense_matrix() const {
  if (is_diagonal()) return eigenvalues_.asDiagonal();
  const Matrix& q = *basis_;
  return q * eigenvalues_.asDiagonal() * q.transpose();
}

Matrix Covariance::precision_matrix() const {
  if (is_diagonal()) return eigenvalues_.cwiseInverse().asDiagonal();
  const Matrix& q = *basis_;
  return q * eigenvalues_.cwiseInverse().asDiagonal() * q.transpose();
}

double Covariance::log_det() const { return eigenvalues_.array().log().sum(); }

Vector Covariance::to_eigen(const Vector& v) const {
  if (is_diagonal()) return v;
  return basis_->transpose() * v;
}

Vector Covariance::from_eigen(const Vector& c) const {
  if (is_diagonal()) return c;
  return *basis_ * c;
}

Vector Covariance::solve(const Vector& v) const {
  return from_eigen(to_eigen(v).cwiseQuotient(eigenvalues_));
}

Vector Covariance::sqrt_apply(const Vector& z) const {
  return from_eigen(z.cwiseProduct(eigenvalues_.cwiseSqrt()));
}

Covariance Covariance::diffused(double alpha_bar) const {
  Vector lam = (alpha_bar * eigenvalues_.array() + (1.0 - alpha_bar)).matrix();
  return Covariance(std::move(lam), basis_);
}

bool Covariance::operator==(const Covariance& other) const {
  if (eigenvalues_ != other.eigenvalues_) return false;
  if (is_diagonal() != other.is_diagonal()) return false;
  return is_diagonal() || basis_ == other.basis_ || *basis_ == *other.basis_;
}

}  // namespace rdp
