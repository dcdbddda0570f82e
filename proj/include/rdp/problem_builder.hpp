#pragma once

#include <cstdint>
#include <optional>

#include "rdp/config.hpp"
#include "rdp/corruption.hpp"
#include "rdp/gaussian_mixture.hpp"
#include "rdp/guidance.hpp"

namespace rdp {

/// Seed streams derived from the master seed of a run.
enum class SeedStream : std::uint64_t { kGroundTruth = 0, kModel = 1, kNoise = 2, kChains = 3, kProbe = 4 };

std::uint64_t stream_seed(std::uint64_t master, SeedStream s);

/// Three-component mixture of smooth fields on a grid with squared-exponential
/// covariances and a diagonal nugget. Used as the image-like prior.
GaussianMixture make_smooth_field_prior(GridShape grid, double nugget);

GaussianMixture parse_prior(const Json& j);
/// `grid` is used when the model spec does not give its own.
ForwardModel build_model(const Json& j, Eigen::Index dim, const std::optional<GridShape>& grid, Rng& rng);

struct BuiltProblem {
  GaussianMixture prior;
  std::optional<GridShape> grid;
  std::shared_ptr<const ForwardModel> model;
  Vector x_true;
  Vector y_clean;
  Corrupted corrupted;
  /// Sigma used by the likelihood; defaults to the nominal noise scale.
  double likelihood_sigma = 0.0;
  Problem problem;
  std::uint64_t chain_master_seed = 0;
};

BuiltProblem build_problem(const RunConfig& cfg);

}  // namespace rdp
