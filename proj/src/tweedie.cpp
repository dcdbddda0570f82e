#include "rdp/tweedie.hpp"

#include <cmath>
#include <limits>

namespace rdp {

Vector tweedie_denoise(const Vector& x_t, const Vector& score, int t, const Schedule& sched) {
  require(x_t.size() == score.size(), "dimension_mismatch", "score and state dimensions differ");
  const double ab = sched.alpha_bar(t);
  return (x_t + (1.0 - ab) * score) / std::sqrt(ab);
}

std::string_view to_string(TweedieCovConvention c) {
  switch (c) {
    case TweedieCovConvention::kQuotedCumulative: return "quoted_cumulative";
    case TweedieCovConvention::kQuotedStep: return "quoted_step";
    case TweedieCovConvention::kVarianceScaled: return "variance_scaled";
  }
  return "unknown";
}

TweedieCov tweedie_posterior_cov(const Matrix& hessian, int t, const Schedule& sched,
                                 TweedieCovConvention convention) {
  require(hessian.rows() == hessian.cols(), "dimension_mismatch", "Hessian must be square");
  const Eigen::Index d = hessian.rows();
  const Matrix eye = Matrix::Identity(d, d);
  const double ab = sched.alpha_bar(t);
  Matrix cov;
  switch (convention) {
    case TweedieCovConvention::kQuotedCumulative:
      cov = (1.0 - ab) * (eye / ab + hessian);
      break;
    case TweedieCovConvention::kQuotedStep: {
      const double a = 1.0 - sched.beta(t);
      cov = (1.0 - a) * (eye / a + hessian);
      break;
    }
    case TweedieCovConvention::kVarianceScaled:
      cov = ((1.0 - ab) / ab) * (eye + (1.0 - ab) * hessian);
      break;
  }
  cov = 0.5 * (cov + cov.transpose());
  TweedieCov out;
  out.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix>(cov, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  out.psd = out.min_eigenvalue >= -1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff());
  out.cov = std::move(cov);
  return out;
}

ConventionReport reconcile_tweedie_convention(const Schedule& sched, int t, double tolerance) {
  // Reference prior N(0, S) with an anisotropic, non-diagonal S; its marginal
  // Hessian and exact p(x0 | x_t) covariance are both closed form.
  Matrix s(2, 2);
  s << 0.8, 0.3, 0.3, 0.5;
  const double ab = sched.alpha_bar(t);
  const Matrix eye = Matrix::Identity(2, 2);
  const Matrix marginal = ab * s + (1.0 - ab) * eye;
  const Matrix marginal_inv = marginal.inverse();
  const Matrix hessian = -marginal_inv;
  const Matrix exact = s - ab * s * marginal_inv * s;

  ConventionReport report{};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kAllTweedieConventions.size(); ++i) {
    const auto conv = kAllTweedieConventions[i];
    const TweedieCov tc = tweedie_posterior_cov(hessian, t, sched, conv);
    const double err = (tc.cov - exact).norm() / exact.norm();
    report.checks[i] = {conv, err, tc.psd};
    if (err < best) {
      best = err;
      report.selected = conv;
    }
  }
  report.any_match = best <= tolerance;
  return report;
}

}  // namespace rdp
