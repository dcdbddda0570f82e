#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "rdp/gaussian_mixture.hpp"
#include "rdp/schedule.hpp"
#include "rdp/types.hpp"

namespace rdp {

/// Score at one (x_t, t). `hessian_vector` is empty when the source has no
/// second-order information.
struct ScoreEval {
  Vector score;
  std::function<Vector(const Vector&)> hessian_vector;
};

/// Stand-in for a learned time-dependent score network.
class ScoreSource {
 public:
  virtual ~ScoreSource() = default;
  virtual Eigen::Index dim() const = 0;
  virtual ScoreEval evaluate(const Vector& x_t, int t) const = 0;
};

/// Exact score of a diffused Gaussian-mixture prior. Marginals for every
/// step are precomputed at construction; evaluation is const and thread-safe.
class AnalyticGmScore final : public ScoreSource {
 public:
  AnalyticGmScore(GaussianMixture prior, Schedule sched);

  Eigen::Index dim() const override { return prior_.dim(); }
  ScoreEval evaluate(const Vector& x_t, int t) const override;

  const GaussianMixture& prior() const { return prior_; }
  const Schedule& schedule() const { return sched_; }
  const GaussianMixture& marginal(int t) const;

 private:
  GaussianMixture prior_;
  Schedule sched_;
  std::vector<GaussianMixture> marginals_;  // index t-1
};

/// Score given by an arbitrary rule, e.g. a perturbed analytic score used to
/// emulate score-approximation error.
class FunctionScore final : public ScoreSource {
 public:
  using Rule = std::function<Vector(const Vector&, int)>;

  FunctionScore(Eigen::Index dim, Rule rule) : dim_(dim), rule_(std::move(rule)) {}

  Eigen::Index dim() const override { return dim_; }
  ScoreEval evaluate(const Vector& x_t, int t) const override;

 private:
  Eigen::Index dim_;
  Rule rule_;
};

}  // namespace rdp
