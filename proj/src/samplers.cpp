#include "rdp/samplers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace rdp {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kDps: return "dps";
    case Method::kLgd: return "lgd";
    case Method::kPigdm: return "pigdm";
  }
  return "unknown";
}

std::string_view to_string(TemperatureRule r) {
  return r == TemperatureRule::kFixed ? "fixed" : "residual_normalized";
}

void validate(const SamplerConfig& config) {
  require(std::isfinite(config.tau) && config.tau >= 0.0, "invalid_config", "tau must be non-negative");
  require(config.tau_eps > 0.0, "invalid_config", "tau_eps must be positive");
  require(config.lgd_n_mc >= 1, "invalid_config", "lgd_n_mc must be at least 1");
  require(config.lgd_kappa >= 0.0, "invalid_config", "lgd_kappa must be non-negative");
  if (config.weight) validate(*config.weight);
}

std::string sampler_label(const SamplerConfig& config) {
  std::string base(to_string(config.method));
  return config.weight ? "rdp-" + base : base;
}

double temperature(const SamplerConfig& config, const Vector& residuals) {
  if (config.temperature_rule == TemperatureRule::kFixed) return config.tau;
  return config.tau / (residuals.norm() + config.tau_eps);
}

namespace {

template <class GuidanceFn>
ChainResult run_reverse(const SamplerConfig& config, const Problem& problem, Rng& rng, GuidanceFn&& guide) {
  validate(config);
  const Schedule& sched = problem.sched;
  ChainResult out;
  Vector x = rng.normal_vector(problem.score->dim());
  for (int t = sched.n_steps(); t >= 1; --t) {
    const Guidance g = guide(x, t);
    const double tau = temperature(config, g.residuals);
    const Vector s_hat = g.score + tau * g.guidance;
    if (config.record_trajectory) {
      out.trajectory.push_back({t, x, g.x0_hat, g.residuals, g.weights, g.threshold, tau, g.guidance.norm()});
    }
    x = ancestral_step(x, s_hat, t, sched, rng, config.deterministic_last_step);
  }
  out.x0 = std::move(x);
  return out;
}

GuidanceOptions guidance_options(const SamplerConfig& config) {
  return {config.jacobian, config.differentiate_weights};
}

}  // namespace

ChainResult sample_dps(const SamplerConfig& config, const Problem& problem, Rng& rng) {
  require(config.method == Method::kDps, "invalid_config", "sample_dps needs method dps");
  const GuidanceOptions opts = guidance_options(config);
  return run_reverse(config, problem, rng, [&](const Vector& x, int t) {
    return rdp_guidance(x, t, problem, config.weight, opts);
  });
}

ChainResult sample_lgd(const SamplerConfig& config, const Problem& problem, Rng& rng) {
  require(config.method == Method::kLgd, "invalid_config", "sample_lgd needs method lgd");
  const GuidanceOptions opts = guidance_options(config);
  const LgdOptions lgd{config.lgd_n_mc, config.lgd_kappa};
  return run_reverse(config, problem, rng, [&](const Vector& x, int t) {
    return Guidance(lgd_guidance(x, t, problem, config.weight, lgd, rng, opts));
  });
}

ChainResult sample_pigdm(const SamplerConfig& config, const Problem& problem, Rng& rng) {
  require(config.method == Method::kPigdm, "invalid_config", "sample_pigdm needs method pigdm");
  const GuidanceOptions opts = guidance_options(config);
  return run_reverse(config, problem, rng, [&](const Vector& x, int t) {
    return pigdm_guidance(x, t, problem, config.weight, config.pigdm_variance, opts);
  });
}

ChainResult sample_chain(const SamplerConfig& config, const Problem& problem, Rng& rng) {
  switch (config.method) {
    case Method::kDps: return sample_dps(config, problem, rng);
    case Method::kLgd: return sample_lgd(config, problem, rng);
    case Method::kPigdm: return sample_pigdm(config, problem, rng);
  }
  throw Error("invalid_config", "unknown sampler method");
}

std::vector<Vector> ChainsResult::successful() const {
  std::vector<Vector> out;
  for (const auto& d : draws)
    if (d) out.push_back(*d);
  return out;
}

std::uint64_t chain_seed(std::uint64_t master_seed, int index) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(index));
}

int default_thread_count() {
  if (const char* env = std::getenv("RDP_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ChainsResult run_chains(const SamplerConfig& config, const Problem& problem, int n_chains, std::uint64_t master_seed,
                        int n_threads) {
  validate(config);
  require(n_chains >= 1, "invalid_config", "n_chains must be at least 1");
  if (n_threads <= 0) n_threads = default_thread_count();
  n_threads = std::min(n_threads, n_chains);

  ChainsResult result;
  result.draws.resize(static_cast<std::size_t>(n_chains));
  if (config.record_trajectory) result.trajectories.resize(static_cast<std::size_t>(n_chains));
  std::atomic<int> next{0};
  std::mutex failure_mutex;

  auto worker = [&] {
    for (int i = next++; i < n_chains; i = next++) {
      Rng rng(chain_seed(master_seed, i));
      try {
        ChainResult chain = sample_chain(config, problem, rng);
        if (config.record_trajectory) result.trajectories[static_cast<std::size_t>(i)] = std::move(chain.trajectory);
        result.draws[static_cast<std::size_t>(i)] = std::move(chain.x0);
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        result.failures.push_back({i, e.code(), e.what()});
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        result.failures.push_back({i, "internal_error", e.what()});
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const ChainFailure& a, const ChainFailure& b) { return a.chain < b.chain; });
  return result;
}

}  // namespace rdp
