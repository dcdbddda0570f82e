#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdp/guidance.hpp"
#include "rdp/rng.hpp"

namespace rdp {

enum class Method { kDps, kLgd, kPigdm };

enum class TemperatureRule {
  /// tau_t = tau.
  kFixed,
  /// tau_t = tau / (||r_t|| + eps).
  kResidualNormalized,
};

std::string_view to_string(Method m);
std::string_view to_string(TemperatureRule r);

struct SamplerConfig {
  Method method = Method::kDps;
  /// Empty for the plain base method.
  std::optional<WeightSpec> weight;
  TemperatureRule temperature_rule = TemperatureRule::kResidualNormalized;
  double tau = 1.0;
  double tau_eps = 1e-8;
  bool differentiate_weights = false;
  bool deterministic_last_step = true;
  JacobianMode jacobian = JacobianMode::kAuto;
  int lgd_n_mc = 10;
  double lgd_kappa = 1.0;
  PigdmVariance pigdm_variance = PigdmVariance::kOneMinusAlphaBar;
  bool record_trajectory = false;
};

void validate(const SamplerConfig& config);

/// Display name such as "dps", "rdp-dps" or "rdp-pigdm".
std::string sampler_label(const SamplerConfig& config);

struct TrajectoryStep {
  int t = 0;
  Vector x_t;
  Vector x0_hat;
  Vector residuals;
  Vector weights;
  double threshold = 0.0;
  double tau = 0.0;
  double guidance_norm = 0.0;
};

using Trajectory = std::vector<TrajectoryStep>;

struct ChainResult {
  Vector x0;
  Trajectory trajectory;
};

double temperature(const SamplerConfig& config, const Vector& residuals);

/// Runs one chain from x_T ~ N(0, I) down to x_0 with the configured method.
ChainResult sample_chain(const SamplerConfig& config, const Problem& problem, Rng& rng);

ChainResult sample_dps(const SamplerConfig& config, const Problem& problem, Rng& rng);
ChainResult sample_lgd(const SamplerConfig& config, const Problem& problem, Rng& rng);
ChainResult sample_pigdm(const SamplerConfig& config, const Problem& problem, Rng& rng);

struct ChainFailure {
  int chain = 0;
  std::string code;
  std::string message;
};

struct ChainsResult {
  /// One slot per chain; empty when that chain failed.
  std::vector<std::optional<Vector>> draws;
  std::vector<Trajectory> trajectories;
  std::vector<ChainFailure> failures;

  std::vector<Vector> successful() const;
};

/// Seed of chain `index` under `master_seed`.
std::uint64_t chain_seed(std::uint64_t master_seed, int index);

/// Worker count from RDP_LAB_THREADS, else the hardware concurrency.
int default_thread_count();

/// Independent chains with seeds chain_seed(master_seed, i). A failing chain
/// is recorded and the rest continue.
ChainsResult run_chains(const SamplerConfig& config, const Problem& problem, int n_chains, std::uint64_t master_seed,
                        int n_threads = 0);

}  // namespace rdp
