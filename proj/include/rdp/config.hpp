#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdp/corruption.hpp"
#include "rdp/samplers.hpp"
#include "rdp/schedule.hpp"

namespace rdp {

using Json = nlohmann::ordered_json;

struct NamedSampler {
  std::string name;
  SamplerConfig config;
};

/// Parsed run configuration. `raw` keeps the document as given (after CLI
/// overrides) so it can be copied into the manifest.
struct RunConfig {
  Json raw;
  std::string name;
  std::uint64_t seed = 0;
  int n_chains = 1;
  Schedule schedule = Schedule::linear(1e-4, 0.02, 1000);
  Json prior;
  Json model;
  NoiseScheme noise = GaussianNoise{};
  Json ground_truth;
  std::optional<double> likelihood_sigma;
  std::vector<NamedSampler> samplers;
  double data_range = 1.0;
  Json probe;
  std::filesystem::path base_dir;
};

Schedule parse_schedule(const Json& j);
NoiseScheme parse_noise(const Json& j);
/// `null` gives the plain (unweighted) sampler; {"type": "uniform"} is kept as a weight.
std::optional<WeightSpec> parse_weight(const Json& j, double default_scale);
SamplerConfig parse_sampler(const Json& j, double default_scale);
GridShape parse_grid(const Json& j);

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Re-parses after overriding seed and chain count.
RunConfig with_overrides(const RunConfig& cfg, std::optional<std::uint64_t> seed, std::optional<int> chains);

}  // namespace rdp
