#include "rdp/score_source.hpp"

namespace rdp {

AnalyticGmScore::AnalyticGmScore(GaussianMixture prior, Schedule sched)
    : prior_(std::move(prior)), sched_(std::move(sched)) {
  marginals_.reserve(static_cast<std::size_t>(sched_.n_steps()));
  for (int t = 1; t <= sched_.n_steps(); ++t) marginals_.push_back(gm_marginal_at_t(prior_, sched_, t));
}

const GaussianMixture& AnalyticGmScore::marginal(int t) const {
  require(t >= 1 && t <= sched_.n_steps(), "step_out_of_range", "score step out of range");
  return marginals_[static_cast<std::size_t>(t - 1)];
}

ScoreEval AnalyticGmScore::evaluate(const Vector& x_t, int t) const {
  const GaussianMixture& gm = marginal(t);
  auto detail = std::make_shared<ScoreDetail>(gm.score_detail(x_t));
  ScoreEval out;
  out.score = detail->score;
  out.hessian_vector = [&gm, detail](const Vector& v) { return gm.hessian_vector(*detail, v); };
  return out;
}

ScoreEval FunctionScore::evaluate(const Vector& x_t, int t) const {
  require(x_t.size() == dim_, "dimension_mismatch", "state dimension differs from score source");
  ScoreEval out;
  out.score = rule_(x_t, t);
  require(out.score.size() == dim_, "dimension_mismatch", "score rule returned wrong dimension");
  return out;
}

}  // namespace rdp
