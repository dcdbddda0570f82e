#include "rdp/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <map>
#include <sstream>

#include "rdp/csv.hpp"
#include "rdp/metrics.hpp"
#include "rdp/probes.hpp"
#include "rdp/problem_builder.hpp"
#include "rdp/robust_weights.hpp"
#include "rdp/svg_plot.hpp"

namespace fs = std::filesystem;

namespace rdp {
namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error("config_error", msg); }

// JSON has no infinities; they are written as the strings "inf", "-inf", "nan".
Json jnum(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double from_jnum(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(k) / (n - 1)));
  return v;
}

// Explicit list, or {"min", "max", "n"} log-spaced, scaled by `unit` when "relative" is set.
std::vector<double> parse_grid_values(const Json& probe, const char* key, std::vector<double> fallback, double unit) {
  if (!probe.contains(key)) return fallback;
  const Json& j = probe.at(key);
  std::vector<double> v;
  if (j.is_array()) {
    v = j.get<std::vector<double>>();
  } else if (j.is_object()) {
    v = log_spaced(j.value("min", 1.0), j.value("max", 1000.0), j.value("n", 13));
    if (j.value("relative", false))
      for (double& x : v) x *= unit;
  } else {
    config_error(std::string("probe.") + key + " must be an array or a range object");
  }
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) config_error(std::string("probe.") + key + " must be strictly increasing");
  return v;
}

std::string curves_csv(const std::vector<ProbeCurve>& curves) {
  std::string s = "label,abscissa,ordinate\n";
  for (const ProbeCurve& c : curves)
    for (std::size_t i = 0; i < c.abscissa.size(); ++i)
      s += c.label + ',' + format_double(c.abscissa[i]) + ',' + format_double(c.ordinate[i]) + '\n';
  return s;
}

Json fit_json(const SlopeFit& f) {
  return {{"slope", jnum(f.slope)},
          {"intercept", jnum(f.intercept)},
          {"ci_low", jnum(f.ci_low)},
          {"ci_high", jnum(f.ci_high)},
          {"n_points", f.n_points}};
}

void write_json(const fs::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

const NamedSampler& find_sampler(const RunConfig& cfg, const Json& probe, const char* key, std::size_t fallback) {
  if (probe.contains(key)) {
    const std::string name = probe.at(key).get<std::string>();
    for (const auto& s : cfg.samplers)
      if (s.name == name) return s;
    config_error(std::string("probe.") + key + " names unknown sampler '" + name + "'");
  }
  if (cfg.samplers.size() <= fallback) config_error(std::string("probe needs a sampler for '") + key + "'");
  return cfg.samplers[fallback];
}

Json metric_block(const Vector& x, const Vector& ref, const std::optional<GridShape>& grid, double data_range) {
  Json m = Json::object();
  m["nmae"] = jnum(nmae(x, ref));
  m["psnr"] = jnum(psnr(x, ref, data_range));
  if (grid && grid->rows >= 7 && grid->cols >= 7) m["ssim"] = jnum(ssim(x, ref, *grid, data_range));
  return m;
}

std::string trajectory_csv(const std::vector<Trajectory>& trajectories) {
  std::string s = "chain,t,tau,threshold,guidance_norm,residual_norm,min_weight\n";
  for (std::size_t c = 0; c < trajectories.size(); ++c) {
    for (const TrajectoryStep& st : trajectories[c]) {
      const double wmin = st.weights.size() ? st.weights.minCoeff() : 1.0;
      s += std::to_string(c) + ',' + std::to_string(st.t) + ',' + format_double(st.tau) + ',' +
           format_double(st.threshold) + ',' + format_double(st.guidance_norm) + ',' +
           format_double(st.residuals.norm()) + ',' + format_double(wmin) + '\n';
    }
  }
  return s;
}

Json manifest_config(const RunConfig& cfg) {
  Json raw = cfg.raw;
  if (raw.contains("ground_truth") && raw["ground_truth"].value("source", std::string()) == "csv") {
    fs::path p = raw["ground_truth"]["path"].get<std::string>();
    if (p.is_relative()) raw["ground_truth"]["path"] = fs::absolute(cfg.base_dir / p).lexically_normal().string();
  }
  return raw;
}

}  // namespace

RunConfig load_config_or_manifest(const fs::path& path, const Overrides& overrides) {
  if (!fs::exists(path)) throw Error("missing_file", "config file not found: " + path.string());
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("artifact_version") && j.contains("config")) j = j.at("config");
  RunConfig cfg = parse_run_config(j, path.parent_path());
  if (overrides.seed || overrides.chains) cfg = with_overrides(cfg, overrides.seed, overrides.chains);
  return cfg;
}

RunOutcome cmd_run(const RunConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_timestamp();
  if (cfg.samplers.empty()) config_error("run needs at least one sampler");
  const BuiltProblem bp = build_problem(cfg);
  const Eigen::Index d = bp.prior.dim();

  std::string samples = "sampler,chain";
  for (Eigen::Index i = 0; i < d; ++i) samples += ",x" + std::to_string(i);
  samples += '\n';

  Json metrics = {{"data_range", cfg.data_range}, {"samplers", Json::array()}};
  Json failures = Json::array();
  RunOutcome outcome{out_dir, 0};
  for (const NamedSampler& ns : cfg.samplers) {
    const ChainsResult res = run_chains(ns.config, bp.problem, cfg.n_chains, bp.chain_master_seed);
    std::vector<double> nm, ps, ss;
    const bool with_ssim = bp.grid && bp.grid->rows >= 7 && bp.grid->cols >= 7;
    for (std::size_t c = 0; c < res.draws.size(); ++c) {
      if (!res.draws[c]) continue;
      const Vector& x = *res.draws[c];
      samples += ns.name + ',' + std::to_string(c);
      for (Eigen::Index i = 0; i < d; ++i) samples += ',' + format_double(x(i));
      samples += '\n';
      nm.push_back(nmae(x, bp.x_true));
      ps.push_back(psnr(x, bp.x_true, cfg.data_range));
      if (with_ssim) ss.push_back(ssim(x, bp.x_true, *bp.grid, cfg.data_range));
    }
    for (const ChainFailure& f : res.failures)
      failures.push_back({{"sampler", ns.name}, {"chain", f.chain}, {"code", f.code}, {"message", f.message}});
    outcome.n_failures += static_cast<int>(res.failures.size());

    Json entry = {{"name", ns.name},
                  {"label", sampler_label(ns.config)},
                  {"n_draws", static_cast<int>(nm.size())},
                  {"n_failed", static_cast<int>(res.failures.size())}};
    const std::vector<Vector> ok = res.successful();
    if (!ok.empty()) {
      Vector mean = Vector::Zero(d);
      for (const Vector& x : ok) mean += x;
      mean /= static_cast<double>(ok.size());
      entry["posterior_mean"] = metric_block(mean, bp.x_true, bp.grid, cfg.data_range);
      Json per_chain = Json::object();
      const auto add = [&](const char* key, const std::vector<double>& v) {
        if (v.empty()) return;
        const Summary s = summarize(v);
        per_chain[key] = {{"median", jnum(s.median)}, {"q25", jnum(s.q25)}, {"q75", jnum(s.q75)}, {"iqr", jnum(s.iqr())}};
      };
      add("nmae", nm);
      add("psnr", ps);
      add("ssim", ss);
      entry["per_chain"] = per_chain;
    }
    metrics["samplers"].push_back(entry);
    if (ns.config.record_trajectory)
      write_atomic(out_dir / "trajectories" / (ns.name + ".csv"), trajectory_csv(res.trajectories));
  }

  std::string gt = "index,x_true\n";
  for (Eigen::Index i = 0; i < d; ++i) gt += std::to_string(i) + ',' + format_double(bp.x_true(i)) + '\n';
  std::string meas = "index,y_clean,y,outlier\n";
  for (Eigen::Index i = 0; i < bp.corrupted.y.size(); ++i)
    meas += std::to_string(i) + ',' + format_double(bp.y_clean(i)) + ',' + format_double(bp.corrupted.y(i)) + ',' +
            (bp.corrupted.outlier_mask[static_cast<std::size_t>(i)] ? "1" : "0") + '\n';

  Json seeds = Json::array();
  for (int c = 0; c < cfg.n_chains; ++c) seeds.push_back(chain_seed(bp.chain_master_seed, c));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const Json manifest = {{"artifact_version", kArtifactVersion},
                         {"name", cfg.name},
                         {"started_at", started},
                         {"wall_clock_seconds", wall},
                         {"seed", cfg.seed},
                         {"chain_master_seed", bp.chain_master_seed},
                         {"chain_seeds", seeds},
                         {"failures", failures},
                         {"config", manifest_config(cfg)}};

  write_atomic(out_dir / "samples.csv", samples);
  write_atomic(out_dir / "ground_truth.csv", gt);
  write_atomic(out_dir / "measurements.csv", meas);
  write_json(out_dir / "metrics.json", metrics);
  write_json(out_dir / "manifest.json", manifest);
  return outcome;
}

Json cmd_probe_weights(const RunConfig& cfg, const fs::path& out_dir) {
  const Json& probe = cfg.probe;
  const BuiltProblem bp = build_problem(cfg);
  const double sigma = bp.likelihood_sigma;

  std::vector<std::pair<std::string, WeightSpec>> weights;
  if (probe.contains("weights")) {
    for (const Json& w : probe.at("weights")) {
      auto spec = parse_weight(w, sigma);
      if (!spec) config_error("probe.weights entries must be weight objects");
      weights.emplace_back(w.value("name", std::string(weight_name(spec->fn))), *spec);
    }
  } else {
    for (const WeightFn& f : std::vector<WeightFn>{UniformWeight{}, ImqWeight{1.0}, HuberWeight{1.0},
                                                   MahalanobisWeight{1.0, Vector(), sigma}})
      weights.emplace_back(std::string(weight_name(f)), WeightSpec(f));
  }
  const double r_max = probe.value("r_max", 1e6);
  const int n_grid = probe.value("n_grid", 2000);

  std::vector<NamedWeight> named;
  for (const auto& [name, spec] : weights) named.push_back({name, spec});
  const int t = probe.value("t", std::max(1, cfg.schedule.n_steps() / 5));
  if (t < 1 || t > cfg.schedule.n_steps()) config_error("probe.t must lie in [1, n_steps]");
  const auto coord = static_cast<Eigen::Index>(probe.value("coord", 0));
  if (coord < 0 || coord >= bp.corrupted.y.size()) config_error("probe.coord is outside the measurement");
  const auto magnitudes = parse_grid_values(probe, "magnitudes", log_spaced(sigma, 1e3 * sigma, 13), sigma);
  Rng rng(stream_seed(cfg.seed, SeedStream::kProbe));
  const Vector x_t = forward_perturb(bp.x_true, t, cfg.schedule, rng);
  const std::vector<ProbeCurve> curves = guidance_sup_probe(named, bp.problem, x_t, t, coord, magnitudes);

  Json report = {{"r_max", r_max}, {"t", t}, {"coord", coord}, {"weights", Json::array()}};
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const RobustReport rr = check_robust_condition(weights[k].second.fn, r_max, n_grid);
    const double growth = last_decade_growth(curves[k]);
    report["weights"].push_back({{"name", weights[k].first},
                                 {"type", std::string(weight_name(weights[k].second.fn))},
                                 {"verdict", rr.robust ? "robust" : "non_robust"},
                                 {"sup_rw", jnum(rr.sup_rw)},
                                 {"sup_r2wprime", jnum(rr.sup_r2wprime)},
                                 {"growth_rw", jnum(rr.growth_rw)},
                                 {"growth_r2wprime", jnum(rr.growth_r2wprime)},
                                 {"guidance_fit", fit_json(curves[k].fit)},
                                 {"guidance_last_decade_growth", jnum(growth)},
                                 {"guidance_bounded", growth < 1.05}});
  }
  write_atomic(out_dir / "guidance_sup_curves.csv", curves_csv(curves));
  write_json(out_dir / "probe_weights.json", report);
  return report;
}

Json cmd_probe_pif(const RunConfig& cfg, const fs::path& out_dir) {
  const Json& probe = cfg.probe;
  const BuiltProblem bp = build_problem(cfg);
  const NamedSampler& plain = find_sampler(cfg, probe, "plain", 0);
  const NamedSampler& robust = find_sampler(cfg, probe, "robust", 1);
  std::vector<Eigen::Index> coords;
  for (int c : probe.value("coords", std::vector<int>{0})) {
    if (c < 0 || c >= bp.corrupted.y.size()) config_error("probe.coords entry is outside the measurement");
    coords.push_back(c);
  }
  const double sigma = bp.likelihood_sigma;
  const auto magnitudes = parse_grid_values(probe, "magnitudes", log_spaced(sigma, 1e3 * sigma, 10), sigma);
  PifOptions opts;
  opts.n_chains = probe.value("n_chains", cfg.n_chains);
  opts.master_seed = bp.chain_master_seed;
  opts.n_proj = probe.value("n_proj", 64);
  const std::string proxy = probe.value("proxy", std::string("sliced_w2"));
  if (proxy == "sliced_w2") opts.proxy = DivergenceProxy::kSlicedW2;
  else if (proxy == "gaussian_kl") opts.proxy = DivergenceProxy::kGaussianKl;
  else config_error("probe.proxy '" + proxy + "' is not one of sliced_w2, gaussian_kl");

  PifResult res = pif_probe(plain.config, robust.config, bp.problem, coords, magnitudes, opts);
  res.plain.label = plain.name;
  res.robust.label = robust.name;
  const double plain_ratio = top_decade_max_over_median(res.plain);
  const double robust_ratio = top_decade_max_over_median(res.robust);
  const Json report = {
      {"proxy", proxy},
      {"n_chains", opts.n_chains},
      {"plain",
       {{"name", plain.name}, {"fit", fit_json(res.plain.fit)}, {"top_decade_max_over_median", jnum(plain_ratio)},
        {"grows_at_least_linearly", res.plain.fit.ci_high >= 1.0 && res.plain.fit.slope >= 0.95}}},
      {"robust",
       {{"name", robust.name}, {"fit", fit_json(res.robust.fit)}, {"top_decade_max_over_median", jnum(robust_ratio)},
        {"bounded", robust_ratio < 2.0}}}};
  write_atomic(out_dir / "pif_curves.csv", curves_csv({res.plain, res.robust}));
  write_json(out_dir / "probe_pif.json", report);
  return report;
}

Json cmd_probe_bias(const RunConfig& cfg, const fs::path& out_dir) {
  const Json& probe = cfg.probe;
  const double r_bound = probe.value("r_bound", 1.0);
  const double sigma = probe.contains("sigma") ? probe.at("sigma").get<double>()
                                               : cfg.likelihood_sigma.value_or(nominal_sigma(cfg.noise));
  const auto c_values = parse_grid_values(
      probe, "c_values", {10 * r_bound, 20 * r_bound, 40 * r_bound, 80 * r_bound}, r_bound);
  std::vector<ProbeCurve> curves{imq_gap_curve(c_values, r_bound, sigma, probe.value("n_grid", 4001))};
  Json report = {{"r_bound", r_bound}, {"sigma", sigma}, {"gap", {{"fit", fit_json(curves[0].fit)}}}};

  if (probe.value("sampled", false)) {
    const BuiltProblem bp = build_problem(cfg);
    const NamedSampler& plain = find_sampler(cfg, probe, "plain", 0);
    PifOptions opts;
    opts.n_chains = probe.value("n_chains", cfg.n_chains);
    opts.master_seed = bp.chain_master_seed;
    opts.n_proj = probe.value("n_proj", 64);
    const auto sampled_c = parse_grid_values(probe, "sampled_c_values", c_values, r_bound);
    curves.push_back(sampled_bias_curve(plain.config, sampled_c, bp.problem, opts));
    report["sampled"] = {{"sampler", plain.name}, {"fit", fit_json(curves.back().fit)}};
  }
  write_atomic(out_dir / "bias_curves.csv", curves_csv(curves));
  write_json(out_dir / "probe_bias.json", report);
  return report;
}

Json cmd_compare(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  if (run_dirs.empty()) config_error("compare needs at least one run directory");
  struct Cell {
    std::string task, noise, sampler, metric;
    double posterior_mean, median, q25, q75;
  };
  std::vector<Cell> cells;
  std::vector<std::string> tasks, noises, samplers, metric_names;
  const auto remember = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  std::string csv = "run,task,noise,sampler,metric,posterior_mean,median,q25,q75\n";
  for (const fs::path& dir : run_dirs) {
    if (!fs::is_directory(dir)) throw Error("missing_file", "run directory not found: " + dir.string());
    for (const char* f : {"manifest.json", "metrics.json"})
      if (!fs::exists(dir / f)) throw Error("missing_file", (dir / f).string() + " not found");
    const Json manifest = Json::parse(read_file(dir / "manifest.json"));
    const Json metrics = Json::parse(read_file(dir / "metrics.json"));
    const Json& config = manifest.at("config");
    const std::string task = config.at("model").value("type", std::string("?"));
    const std::string noise = config.at("noise").value("type", std::string("?"));
    remember(tasks, task);
    remember(noises, noise);
    for (const Json& s : metrics.at("samplers")) {
      const std::string name = s.at("name").get<std::string>();
      remember(samplers, name);
      if (!s.contains("posterior_mean")) continue;
      for (const auto& [metric, value] : s.at("posterior_mean").items()) {
        remember(metric_names, metric);
        Cell c{task, noise, name, metric, from_jnum(value), NAN, NAN, NAN};
        if (s.contains("per_chain") && s.at("per_chain").contains(metric)) {
          const Json& pc = s.at("per_chain").at(metric);
          c.median = from_jnum(pc.at("median"));
          c.q25 = from_jnum(pc.at("q25"));
          c.q75 = from_jnum(pc.at("q75"));
        }
        csv += dir.filename().string() + ',' + task + ',' + noise + ',' + name + ',' + metric + ',' +
               format_double(c.posterior_mean) + ',' + format_double(c.median) + ',' + format_double(c.q25) + ',' +
               format_double(c.q75) + '\n';
        cells.push_back(std::move(c));
      }
    }
  }

  // Markdown grid: one row per (task, sampler), one column per (noise, metric).
  std::ostringstream md;
  md << "| task | sampler |";
  for (const auto& n : noises)
    for (const auto& m : metric_names) md << ' ' << n << ' ' << m << " |";
  md << "\n|---|---|";
  for (std::size_t k = 0; k < noises.size() * metric_names.size(); ++k) md << "---|";
  md << '\n';
  Json grid = Json::array();
  for (const auto& task : tasks) {
    for (const auto& s : samplers) {
      bool any = false;
      std::ostringstream row;
      row << "| " << task << " | " << s << " |";
      for (const auto& n : noises) {
        for (const auto& m : metric_names) {
          const auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
            return c.task == task && c.sampler == s && c.noise == n && c.metric == m;
          });
          if (it == cells.end()) {
            row << " - |";
            continue;
          }
          any = true;
          row << ' ' << std::defaultfloat << std::setprecision(4) << it->posterior_mean << " |";
          grid.push_back({{"task", task}, {"sampler", s}, {"noise", n}, {"metric", m}, {"value", jnum(it->posterior_mean)}});
        }
      }
      if (any) md << row.str() << '\n';
    }
  }
  write_atomic(out_dir / "compare.csv", csv);
  write_atomic(out_dir / "compare.md", md.str());
  return {{"tasks", tasks}, {"noises", noises}, {"samplers", samplers}, {"metrics", metric_names}, {"cells", grid}};
}

std::vector<fs::path> cmd_plot(const fs::path& run_dir, const fs::path& out_dir) {
  if (!fs::is_directory(run_dir)) throw Error("missing_file", "run directory not found: " + run_dir.string());
  std::vector<fs::path> written;
  const fs::path metrics_path = run_dir / "metrics.json";
  if (fs::exists(metrics_path)) {
    const Json metrics = Json::parse(read_file(metrics_path));
    std::map<std::string, std::vector<Bar>> by_metric;
    for (const Json& s : metrics.at("samplers")) {
      if (!s.contains("per_chain")) continue;
      for (const auto& [metric, pc] : s.at("per_chain").items())
        by_metric[metric].push_back(
            {s.at("name").get<std::string>(), from_jnum(pc.at("median")), from_jnum(pc.at("q25")), from_jnum(pc.at("q75"))});
    }
    for (const auto& [metric, bars] : by_metric) {
      const fs::path p = out_dir / ("metric_" + metric + ".svg");
      write_atomic(p, bar_chart_svg(metric + " per chain (median, IQR)", metric, bars));
      written.push_back(p);
    }
  }
  const std::vector<std::pair<std::string, std::string>> probes = {
      {"guidance_sup_curves", "guidance sup-norm vs corruption magnitude"},
      {"pif_curves", "posterior divergence vs corruption magnitude"},
      {"bias_curves", "IMQ bias vs c"}};
  for (const auto& [stem, title] : probes) {
    const fs::path src = run_dir / (stem + ".csv");
    if (!fs::exists(src)) continue;
    const CsvTable t = read_csv(src);
    std::vector<LineSeries> series;
    for (const auto& row : t.rows) {
      if (row.size() < 3) continue;
      if (series.empty() || series.back().label != row[0]) series.push_back({row[0], {}, {}});
      series.back().x.push_back(std::stod(row[1]));
      series.back().y.push_back(std::stod(row[2]));
    }
    const fs::path p = out_dir / (stem + ".svg");
    write_atomic(p, loglog_chart_svg(title, stem == "bias_curves" ? "c" : "magnitude", "value", series));
    written.push_back(p);
  }
  return written;
}

}  // namespace rdp
