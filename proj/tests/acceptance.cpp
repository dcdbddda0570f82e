// Acceptance suite: one PASS/FAIL line per criterion, each checked at its
// pinned tolerance and runtime budget. Criteria can be selected by number on
// the command line; exit status is nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdp/csv.hpp"
#include "rdp/distances.hpp"
#include "rdp/metrics.hpp"
#include "rdp/probes.hpp"
#include "rdp/problem_builder.hpp"
#include "rdp/robust_weights.hpp"
#include "rdp/runner.hpp"
#include "rdp/score_source.hpp"
#include "rdp/tweedie.hpp"

using namespace rdp;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(RDP_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

Vector sample_mean(const std::vector<Vector>& xs) {
  Vector m = Vector::Zero(xs.front().size());
  for (const Vector& x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

std::vector<Vector> draws(const ChainsResult& r) {
  if (!r.failures.empty()) throw Error("chain_failure", r.failures.front().message);
  return r.successful();
}

SamplerConfig dps(double tau = 1.0) {
  SamplerConfig c;
  c.method = Method::kDps;
  c.temperature_rule = TemperatureRule::kFixed;
  c.tau = tau;
  return c;
}

// 1 -------------------------------------------------------------------------
Outcome robust_condition_verdicts() {
  const double c = 1.0;
  const std::vector<std::pair<WeightFn, bool>> cases = {
      {UniformWeight{}, false}, {ImqWeight{c}, true}, {HuberWeight{1.0}, true}, {MahalanobisWeight{c, Vector(), 0.5}, true}};
  Outcome o{true, ""};
  double imq_sup = 0.0;
  for (const auto& [wf, expect] : cases) {
    const RobustReport r = check_robust_condition(wf, 1e6);
    o.pass &= r.robust == expect;
    o.detail += std::string(weight_name(wf)) + "=" + (r.robust ? "robust" : "non_robust") + " ";
    if (std::holds_alternative<ImqWeight>(wf)) imq_sup = r.sup_rw;
  }
  for (double cc : {0.1, 1.0, 7.5}) {
    const double sup = check_robust_condition(ImqWeight{cc}, 1e6).sup_rw;
    o.pass &= std::abs(sup - cc) <= 1e-3 * cc;
  }
  o.detail += "| IMQ sup|r w| = " + fmt(imq_sup, 10) + " (c = 1)";
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome influence_algebra() {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> logr(-3.0, 3.0), logc(-1.0, 1.0), logs(-2.0, 0.5);
  double worst = 0.0;
  bool uniform_exact = true;
  for (int k = 0; k < 1000; ++k) {
    const double r = (k % 2 ? -1.0 : 1.0) * std::pow(10.0, logr(gen));
    const double c = std::pow(10.0, logc(gen)), sigma = std::pow(10.0, logs(gen));
    const double u = r * r / (c * c);
    const double closed = (r + r * r * r / (2.0 * c * c)) / (sigma * sigma * std::pow(1.0 + u, 1.5));
    const double generic = psi(ImqWeight{c}, r, sigma);
    worst = std::max(worst, std::abs(generic - closed) / std::abs(closed));
    uniform_exact &= psi(UniformWeight{}, r, sigma) == r / (sigma * sigma);
  }
  return {worst <= 1e-12 && uniform_exact,
          "max rel err IMQ = " + fmt(worst, 3) + ", uniform exact = " + (uniform_exact ? "yes" : "no")};
}

// 3 -------------------------------------------------------------------------
Outcome bias_scaling() {
  const double R = 1.0;
  const ProbeCurve c = imq_gap_curve({10 * R, 20 * R, 40 * R, 80 * R}, R, 0.5);
  return {std::abs(c.fit.slope + 2.0) <= 0.1,
          "slope = " + fmt(c.fit.slope, 6) + " (95% CI " + fmt(c.fit.ci_low) + ", " + fmt(c.fit.ci_high) + ")"};
}

// 4 -------------------------------------------------------------------------
Outcome conjugate_exactness() {
  const Schedule sched = Schedule::linear(1e-4, 0.02, 500);
  std::string detail;
  bool pass = true;

  // (a) Tweedie against Gaussian conditioning for a correlated Gaussian prior.
  Vector mu(2);
  mu << 0.5, -0.5;
  Matrix sigma(2, 2);
  sigma << 1.0, 0.3, 0.3, 0.5;
  const GaussianMixture g({1.0}, {{mu, Covariance::dense(sigma)}});
  const AnalyticGmScore gs(g, sched);
  Rng rng(4);
  double worst_a = 0.0;
  for (int t : {1, 10, 100, 250, 500}) {
    const double ab = sched.alpha_bar(t);
    const Matrix marg = ab * sigma + (1.0 - ab) * Matrix::Identity(2, 2);
    for (int k = 0; k < 20; ++k) {
      const Vector x = 2.0 * rng.normal_vector(2);
      const Vector closed = mu + std::sqrt(ab) * sigma * marg.ldlt().solve(x - std::sqrt(ab) * mu);
      const Vector est = tweedie_denoise(x, gs.evaluate(x, t).score, t, sched);
      worst_a = std::max(worst_a, (est - closed).norm() / std::max(1.0, closed.norm()));
    }
  }
  const bool pass_a = worst_a <= 1e-10;
  pass &= pass_a;
  detail += std::string("(a) ") + (pass_a ? "ok" : "FAIL") + " err " + fmt(worst_a, 3);

  // (b) Plain PiGDM guidance against the exact conditional-likelihood score.
  // The isotropic r_t^2 = 1 - ab_t is exact for identity-covariance priors.
  const GaussianMixture iso({1.0}, {{mu, Covariance::diagonal(Vector::Ones(2))}});
  auto score = std::make_shared<AnalyticGmScore>(iso, sched);
  Matrix a(3, 2);
  a << 1.0, 0.2, 0.0, 0.8, -0.5, 0.4;
  Vector y(3);
  y << 0.3, -0.7, 1.1;
  const Problem pb = make_problem(score, std::make_shared<ForwardModel>(ForwardModel::dense_linear(a)), y, 0.4, sched);
  double worst_b = 0.0;
  for (int t : {1, 10, 100, 250, 500}) {
    for (int k = 0; k < 10; ++k) {
      const Vector x = 2.0 * rng.normal_vector(2);
      const Vector exact = gm_conditional_score(iso, a, 0.4, y, t, sched, x) - score->evaluate(x, t).score;
      const Vector got = pigdm_guidance(x, t, pb, std::nullopt, PigdmVariance::kOneMinusAlphaBar).guidance;
      worst_b = std::max(worst_b, (got - exact).norm() / exact.norm());
    }
  }
  const bool pass_b = worst_b <= 1e-6;
  pass &= pass_b;
  detail += std::string(" | (b) ") + (pass_b ? "ok" : "FAIL") + " rel err " + fmt(worst_b, 3);

  // (c) DPS posterior mean on the bundled conjugate problem.
  const RunConfig cfg = load_run_config(kConfigs / "conjugate_2d.json");
  const BuiltProblem bp = build_problem(cfg);
  const int n = 2000;
  const GaussianMixture post = gm_posterior_linear(bp.prior, bp.model->dense_matrix(), bp.likelihood_sigma, bp.corrupted.y);
  const Vector oracle = post.mean();
  const std::vector<Vector> xs = draws(run_chains(dps(), bp.problem, n, bp.chain_master_seed));
  const SampleMoments m = sample_moments(xs);
  double worst_z = 0.0;
  for (Eigen::Index i = 0; i < 2; ++i)
    worst_z = std::max(worst_z, std::abs(m.mean(i) - oracle(i)) / std::sqrt(m.cov(i, i) / n));
  const bool pass_c = worst_z <= 3.0;
  pass &= pass_c;
  SamplerConfig pig;
  pig.method = Method::kPigdm;
  pig.temperature_rule = TemperatureRule::kFixed;
  const Vector pig_mean = sample_mean(draws(run_chains(pig, bp.problem, n, bp.chain_master_seed)));
  double pig_z = 0.0;
  for (Eigen::Index i = 0; i < 2; ++i)
    pig_z = std::max(pig_z, std::abs(pig_mean(i) - oracle(i)) / std::sqrt(post.covariance()(i, i) / n));
  detail += std::string(" | (c) ") + (pass_c ? "ok" : "FAIL") + " DPS mean (" + fmt(m.mean(0)) + ", " +
            fmt(m.mean(1)) + ") vs oracle (" + fmt(oracle(0)) + ", " + fmt(oracle(1)) + "), max |z| = " +
            fmt(worst_z, 3) + "; PiGDM max |z| = " + fmt(pig_z, 3);
  return {pass, detail};
}

// 5 -------------------------------------------------------------------------
Outcome gm_oracle_recovery() {
  RunConfig cfg = load_run_config(kConfigs / "gm_oracle_2d.json");
  const BuiltProblem bp = build_problem(cfg);
  const int n = 2000;
  require(cfg.schedule.n_steps() == 1000, "config_error", "gm_oracle_2d must use 1000 steps");
  const GaussianMixture post =
      gm_posterior_linear(bp.prior, bp.model->dense_matrix(), bp.likelihood_sigma, bp.corrupted.y);
  Rng orng(stream_seed(cfg.seed, SeedStream::kProbe));
  const std::vector<Vector> oracle = gm_sample(post, 20000, orng);

  SamplerConfig plain = dps();
  SamplerConfig robust = dps();
  robust.weight = WeightSpec(ImqWeight{1.0}, 0.9);
  const auto a = draws(run_chains(plain, bp.problem, n, bp.chain_master_seed));
  const auto b = draws(run_chains(robust, bp.problem, n, bp.chain_master_seed));
  const auto sw = [](const std::vector<Vector>& p, const std::vector<Vector>& q) {
    Rng r(99);
    return sliced_w2(p, q, 256, r);
  };
  const double da = sw(a, oracle), db = sw(b, oracle), dab = sw(a, b);
  return {da <= 0.15 && db <= 0.15 && dab <= 0.05,
          "SW2(DPS, oracle) = " + fmt(da) + ", SW2(RDP-IMQ, oracle) = " + fmt(db) + ", SW2(DPS, RDP) = " + fmt(dab)};
}

// 6 -------------------------------------------------------------------------
Outcome boundedness() {
  std::string detail;
  bool pass = true;
  {
    const RunConfig cfg = load_run_config(kConfigs / "probe_weights.json");
    const BuiltProblem bp = build_problem(cfg);
    const double s = bp.likelihood_sigma;
    std::vector<double> mags;
    for (int k = 0; k <= 12; ++k) mags.push_back(s * std::pow(10.0, k / 4.0));
    Rng rng(stream_seed(cfg.seed, SeedStream::kProbe));
    const int t = 20;
    const Vector x_t = forward_perturb(bp.x_true, t, cfg.schedule, rng);
    const auto curves = guidance_sup_probe({{"uniform", WeightSpec(UniformWeight{})},
                                            {"imq", WeightSpec(ImqWeight{1.0})},
                                            {"huber", WeightSpec(HuberWeight{1.0})}},
                                           bp.problem, x_t, t, 0, mags);
    const bool slope_ok = std::abs(curves[0].fit.slope - 1.0) <= 0.05;
    const double g_imq = last_decade_growth(curves[1]), g_hub = last_decade_growth(curves[2]);
    pass &= slope_ok && g_imq < 1.05 && g_hub < 1.05;
    detail += "uniform slope " + fmt(curves[0].fit.slope, 5) + ", last-decade growth IMQ " + fmt(g_imq, 5) +
              " Huber " + fmt(g_hub, 5);
  }
  {
    const RunConfig cfg = load_run_config(kConfigs / "probe_pif.json");
    const BuiltProblem bp = build_problem(cfg);
    PifOptions opts;
    opts.n_chains = cfg.probe.value("n_chains", 200);
    opts.master_seed = bp.chain_master_seed;
    std::vector<double> mags;
    for (int k = 0; k < 10; ++k) mags.push_back(bp.likelihood_sigma * std::pow(10.0, k / 3.0));
    const PifResult r = pif_probe(cfg.samplers[0].config, cfg.samplers[1].config, bp.problem, {0}, mags, opts);
    const bool grows = r.plain.fit.ci_high >= 1.0 && r.plain.fit.slope >= 0.95;
    const double ratio = top_decade_max_over_median(r.robust);
    pass &= grows && ratio < 2.0;
    detail += " | PIF DPS slope " + fmt(r.plain.fit.slope, 4) + " (CI " + fmt(r.plain.fit.ci_low, 4) + ", " +
              fmt(r.plain.fit.ci_high, 4) + "), RDP top-decade max/median " + fmt(ratio, 5);
  }
  return {pass, detail};
}

// 7 -------------------------------------------------------------------------
Outcome robustness_ordering() {
  const int n_trials = 20, n_chains = 32;
  const std::vector<std::pair<std::string, Json>> schemes = {
      {"impulsive", {{"type", "impulsive"}, {"sigma_y", 0.05}, {"fraction", 0.05}, {"magnitude", 30.0}}},
      {"student_t", {{"type", "student_t"}, {"sigma_y", 0.05}, {"nu", 2.5}}},
      {"gaussian", {{"type", "gaussian"}, {"sigma_y", 0.05}}}};
  SamplerConfig plain = dps();
  SamplerConfig robust = dps();
  robust.weight = WeightSpec(ImqWeight{1.0}, 0.9);

  bool pass = true;
  std::string detail;
  for (const auto& [name, noise] : schemes) {
    std::vector<double> e_plain, e_robust;
    for (int k = 0; k < n_trials; ++k) {
      const Json j = {{"seed", 100 + k},
                      {"n_chains", n_chains},
                      {"schedule", {{"beta_min", 1e-4}, {"beta_max", 0.02}, {"n_steps", 1000}}},
                      {"prior", {{"type", "smooth_field"}, {"grid", {8, 8}}, {"nugget", 2e-3}}},
                      {"model", {{"type", "mask"}, {"observed_fraction", 0.5}}},
                      {"noise", noise},
                      {"samplers", Json::parse(R"([{"method": "dps"}])")}};
      const BuiltProblem bp = build_problem(parse_run_config(j));
      e_plain.push_back(nmae(sample_mean(draws(run_chains(plain, bp.problem, n_chains, bp.chain_master_seed))), bp.x_true));
      e_robust.push_back(nmae(sample_mean(draws(run_chains(robust, bp.problem, n_chains, bp.chain_master_seed))), bp.x_true));
    }
    const double mp = quantile(e_plain, 0.5), mr = quantile(e_robust, 0.5);
    const SignTest st = sign_test_less(e_robust, e_plain);
    bool ok;
    if (name == "gaussian") {
      ok = std::abs(mr - mp) / mp <= 0.10;
      detail += name + ": median NMAE DPS " + fmt(mp) + " RDP " + fmt(mr) + " rel diff " + fmt((mr - mp) / mp, 3);
    } else {
      ok = mr < mp && st.p_value < 0.05;
      detail += name + ": median NMAE DPS " + fmt(mp) + " RDP " + fmt(mr) + " wins " + std::to_string(st.wins) + "/" +
                std::to_string(n_trials) + " p " + fmt(st.p_value, 3) + " | ";
    }
    if (!ok) detail += "[" + name + " fails] ";
    pass &= ok;
  }
  return {pass, detail};
}

// 8 -------------------------------------------------------------------------
Outcome second_order_tweedie() {
  const Schedule sched = Schedule::linear(1e-4, 0.02, 1000);
  Vector m0(1), m1(1), v0(1), v1(1);
  m0 << -1.5;
  m1 << 2.0;
  v0 << 0.3;
  v1 << 0.6;
  const GaussianMixture gm({0.4, 0.6}, {{m0, Covariance::diagonal(v0)}, {m1, Covariance::diagonal(v1)}});
  const AnalyticGmScore score(gm, sched);
  Rng rng(8);
  double worst = 0.0;
  bool psd = true;
  std::string selected;
  for (int t : {50, 200, 500}) {
    const ConventionReport rep = reconcile_tweedie_convention(sched, t);
    if (!rep.any_match) return {false, "no convention matches Gaussian conditioning at t = " + std::to_string(t)};
    selected = std::string(to_string(rep.selected));
    const double ab = sched.alpha_bar(t);
    for (double xv : {-1.0, 0.2, 1.5}) {
      Vector x(1);
      x << xv;
      const TweedieCov tc = tweedie_posterior_cov(score.marginal(t).hessian(x), t, sched, rep.selected);
      Matrix a(1, 1);
      a << std::sqrt(ab);
      const GaussianMixture post = gm_posterior_linear(gm, a, std::sqrt(1.0 - ab), x);
      const std::vector<Vector> xs = gm_sample(post, 200000, rng);
      const double mc = sample_moments(xs).cov(0, 0);
      worst = std::max(worst, std::abs(tc.cov(0, 0) - mc) / mc);
      psd &= tc.psd;
    }
  }
  return {worst <= 0.05 && psd,
          "convention " + selected + ", max rel err vs MC " + fmt(worst, 3) + ", PSD " + (psd ? "yes" : "no")};
}

// 9 -------------------------------------------------------------------------
Outcome plugin_identity() {
  const RunConfig cfg = load_run_config(kConfigs / "inpaint_impulsive.json");
  const BuiltProblem bp = build_problem(cfg);
  int identical = 0, total = 0;
  for (Method m : {Method::kDps, Method::kLgd, Method::kPigdm}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      SamplerConfig plain;
      plain.method = m;
      plain.lgd_n_mc = 4;
      SamplerConfig uniform = plain;
      uniform.weight = WeightSpec(UniformWeight{});
      const ChainsResult a = run_chains(plain, bp.problem, 4, seed);
      const ChainsResult b = run_chains(uniform, bp.problem, 4, seed);
      bool same = a.failures.empty() && b.failures.empty();
      for (std::size_t c = 0; same && c < a.draws.size(); ++c) same = *a.draws[c] == *b.draws[c];
      identical += same;
      ++total;
    }
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) + " method x seed pairs bit-identical"};
}

// 10 ------------------------------------------------------------------------
Outcome reproducibility() {
  const fs::path tmp = fs::temp_directory_path() / ("rdp_lab_acceptance_" + std::to_string(std::random_device{}()));
  int same = 0, total = 0;
  std::string mismatched;
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".json" || e.path().filename() == "run_config.schema.json") continue;
    const std::string stem = e.path().stem().string();
    cmd_run(load_config_or_manifest(e.path()), tmp / stem / "a");
    cmd_run(load_config_or_manifest(e.path()), tmp / stem / "b");
    const bool eq = read_file(tmp / stem / "a" / "samples.csv") == read_file(tmp / stem / "b" / "samples.csv");
    same += eq;
    ++total;
    if (!eq) mismatched += " " + stem;
  }
  fs::remove_all(tmp);
  return {same == total && total > 0,
          std::to_string(same) + "/" + std::to_string(total) + " bundled configs byte-identical" + mismatched};
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "robust-condition verdicts", 1, robust_condition_verdicts},
      {2, "influence-function algebra", 1, influence_algebra},
      {3, "IMQ bias scaling", 1, bias_scaling},
      {4, "conjugate exactness", 120, conjugate_exactness},
      {5, "GM oracle recovery", 180, gm_oracle_recovery},
      {6, "boundedness vs blow-up", 600, boundedness},
      {7, "robustness ordering", 900, robustness_ordering},
      {8, "second-order Tweedie", 60, second_order_tweedie},
      {9, "plug-in identity", 120, plugin_identity},
      {10, "reproducibility", 600, reproducibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = o.pass && in_budget;
    std::printf("%s  [%d] %s (%.2f s, budget %.0f s%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                c.budget_seconds, in_budget ? "" : ", OVER BUDGET", o.detail.c_str());
    std::fflush(stdout);
    failed += !pass;
    ++ran;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
