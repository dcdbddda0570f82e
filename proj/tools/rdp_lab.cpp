#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdp/csv.hpp"
#include "rdp/runner.hpp"

namespace fs = std::filesystem;

namespace {

int fail(const std::string& code, const std::string& message, const rdp::Json& extra = rdp::Json::object()) {
  rdp::Json err = {{"error", code}, {"message", message}};
  for (const auto& [k, v] : extra.items()) err[k] = v;
  std::cerr << err.dump() << std::endl;
  return code == "chain_failure" ? 3 : 2;
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "Run configuration (JSON) or a run manifest");
  if (needs_config) opt->required();
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--seed", c.seed, "Override the master seed");
  cmd->add_option("--chains", c.chains, "Override the number of chains")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust diffusion posterior sampling lab"};
  app.require_subcommand(1);

  Common run_opts, weights_opts, pif_opts, bias_opts, compare_opts, plot_opts;
  std::vector<std::string> compare_dirs;
  std::string plot_dir;

  auto* run = app.add_subcommand("run", "Sample every configured sampler and write a run record");
  add_common(run, run_opts, true);
  auto* pw = app.add_subcommand("probe-weights", "Robust-condition verdicts and guidance sup-norm curves");
  add_common(pw, weights_opts, true);
  auto* pp = app.add_subcommand("probe-pif", "Posterior influence curves for a plain/robust sampler pair");
  add_common(pp, pif_opts, true);
  auto* pb = app.add_subcommand("probe-bias", "IMQ bias curves against the threshold c");
  add_common(pb, bias_opts, true);
  auto* cmp = app.add_subcommand("compare", "Metric grid over run directories");
  add_common(cmp, compare_opts, false);
  cmp->add_option("runs", compare_dirs, "Run directories")->required();
  auto* plot = app.add_subcommand("plot", "SVG charts for a run or probe directory");
  add_common(plot, plot_opts, false);
  plot->add_option("run", plot_dir, "Run or probe directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage_error", e.what());
  }

  try {
    const auto load = [](const Common& c) { return rdp::load_config_or_manifest(c.config, {c.seed, c.chains}); };
    if (run->parsed()) {
      const rdp::RunOutcome res = rdp::cmd_run(load(run_opts), run_opts.out);
      if (res.n_failures > 0)
        return fail("chain_failure", "some chains failed; partial results written",
                    {{"n_failures", res.n_failures}, {"manifest", (res.out_dir / "manifest.json").string()}});
      std::cout << (res.out_dir / "manifest.json").string() << '\n';
    } else if (pw->parsed()) {
      std::cout << rdp::cmd_probe_weights(load(weights_opts), weights_opts.out).dump(2) << '\n';
    } else if (pp->parsed()) {
      std::cout << rdp::cmd_probe_pif(load(pif_opts), pif_opts.out).dump(2) << '\n';
    } else if (pb->parsed()) {
      std::cout << rdp::cmd_probe_bias(load(bias_opts), bias_opts.out).dump(2) << '\n';
    } else if (cmp->parsed()) {
      std::vector<fs::path> dirs(compare_dirs.begin(), compare_dirs.end());
      rdp::cmd_compare(dirs, compare_opts.out);
      std::cout << rdp::read_file(fs::path(compare_opts.out) / "compare.md");
    } else if (plot->parsed()) {
      for (const auto& p : rdp::cmd_plot(plot_dir, plot_opts.out)) std::cout << p.string() << '\n';
    }
  } catch (const rdp::Error& e) {
    return fail(e.code(), e.what());
  } catch (const rdp::Json::exception& e) {
    return fail("config_error", e.what());
  } catch (const std::exception& e) {
    return fail("internal_error", e.what());
  }
  return EXIT_SUCCESS;
}
