#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rdp/config.hpp"

namespace rdp {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
};

/// Loads a run config, or the config embedded in a run manifest.
RunConfig load_config_or_manifest(const std::filesystem::path& path, const Overrides& overrides = {});

struct RunOutcome {
  std::filesystem::path out_dir;
  int n_failures = 0;
};

/// Samples every configured sampler and writes manifest.json, samples.csv,
/// metrics.json, measurements.csv and ground_truth.csv under `out_dir`.
/// Chain failures are recorded in the manifest; the run still completes.
RunOutcome cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Robust-condition verdicts and guidance sup-norm curves per weight.
Json cmd_probe_weights(const RunConfig& cfg, const std::filesystem::path& out_dir);
Json cmd_probe_pif(const RunConfig& cfg, const std::filesystem::path& out_dir);
Json cmd_probe_bias(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Metric grid over run directories: samplers x noise schemes x metrics.
Json cmd_compare(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir);

/// Writes SVG charts for a run or probe directory; returns the files written.
std::vector<std::filesystem::path> cmd_plot(const std::filesystem::path& run_dir,
                                            const std::filesystem::path& out_dir);

}  // namespace rdp
