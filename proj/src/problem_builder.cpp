#include "rdp/problem_builder.hpp"

#include <cmath>

#include "rdp/csv.hpp"
#include "rdp/score_source.hpp"

namespace rdp {
namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error("config_error", msg); }

Vector to_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be an array of numbers");
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) config_error(where + " must be a non-empty array of rows");
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) config_error(where + " rows have unequal lengths");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

Matrix squared_exponential(GridShape g, double s, double ell, double nugget) {
  const int d = g.size();
  Matrix c(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const double di = a / g.cols - b / g.cols;
      const double dj = a % g.cols - b % g.cols;
      c(a, b) = s * s * std::exp(-(di * di + dj * dj) / (2.0 * ell * ell));
    }
    c(a, a) += nugget;
  }
  return c;
}

std::optional<GridShape> prior_grid(const Json& prior) {
  if (prior.value("type", std::string()) == "smooth_field") return parse_grid(prior.at("grid"));
  if (prior.contains("grid")) return parse_grid(prior.at("grid"));
  return std::nullopt;
}

GridShape model_grid(const Json& model, const std::optional<GridShape>& fallback) {
  if (model.contains("grid")) return parse_grid(model.at("grid"));
  if (fallback) return *fallback;
  config_error("model '" + model.value("type", std::string()) + "' needs a grid");
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, SeedStream s) {
  return derive_seed(master, static_cast<std::uint64_t>(s));
}

GaussianMixture make_smooth_field_prior(GridShape grid, double nugget) {
  require(grid.rows > 0 && grid.cols > 0, "config_error", "smooth_field grid must be positive");
  require(nugget > 0.0 && std::isfinite(nugget), "config_error", "smooth_field nugget must be positive");
  const int d = grid.size();
  Vector m0(d), m1(d), m2(d);
  const double ci = 0.5 * (grid.rows - 1), cj = 0.5 * (grid.cols - 1);
  for (int a = 0; a < d; ++a) {
    const double i = a / grid.cols, j = a % grid.cols;
    m0(a) = 0.5 + 0.3 * std::sin(i / 2.0);
    m1(a) = 0.5 + 0.3 * std::cos(j / 2.0);
    m2(a) = 0.3 + 0.4 * std::exp(-((i - ci) * (i - ci) + (j - cj) * (j - cj)) / 8.0);
  }
  std::vector<GaussianComponent> comps{
      {m0, Covariance::dense(squared_exponential(grid, 0.15, 2.0, nugget))},
      {m1, Covariance::dense(squared_exponential(grid, 0.15, 1.5, nugget))},
      {m2, Covariance::dense(squared_exponential(grid, 0.12, 2.5, nugget))},
  };
  return GaussianMixture({0.3, 0.3, 0.4}, std::move(comps));
}

GaussianMixture parse_prior(const Json& j) {
  const std::string type = j.value("type", std::string());
  if (type == "smooth_field") return make_smooth_field_prior(parse_grid(j.at("grid")), j.value("nugget", 2e-3));
  if (type != "gaussian_mixture") config_error("prior.type '" + type + "' is not one of gaussian_mixture, smooth_field");
  if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty())
    config_error("prior.components must be a non-empty array");
  std::vector<GaussianComponent> comps;
  for (const Json& c : j.at("components")) {
    if (!c.contains("mean")) config_error("prior component needs a mean");
    Vector mean = to_vector(c.at("mean"), "prior.mean");
    if (c.contains("covariance") == c.contains("variances"))
      config_error("prior component needs exactly one of covariance, variances");
    Covariance cov = c.contains("variances") ? Covariance::diagonal(to_vector(c.at("variances"), "prior.variances"))
                                             : Covariance::dense(to_matrix(c.at("covariance"), "prior.covariance"));
    if (cov.dim() != mean.size()) config_error("prior component covariance does not match its mean");
    comps.push_back({std::move(mean), std::move(cov)});
  }
  std::vector<double> weights;
  if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
  else weights.assign(comps.size(), 1.0 / static_cast<double>(comps.size()));
  try {
    return GaussianMixture(std::move(weights), std::move(comps));
  } catch (const Error& e) {
    config_error(std::string("prior: ") + e.what());
  }
}

ForwardModel build_model(const Json& j, Eigen::Index dim, const std::optional<GridShape>& grid, Rng& rng) {
  const std::string type = j.value("type", std::string());
  auto grid_for = [&](const Json& m) {
    const GridShape g = model_grid(m, grid);
    if (g.size() != dim) config_error("model grid does not match the prior dimension");
    return g;
  };
  if (type == "identity") return ForwardModel::dense_linear(Matrix::Identity(dim, dim));
  if (type == "dense_linear") {
    Matrix a = to_matrix(j.at("matrix"), "model.matrix");
    if (a.cols() != dim) config_error("model.matrix has the wrong number of columns");
    return ForwardModel::dense_linear(std::move(a));
  }
  if (type == "mask") {
    const GridShape g = grid_for(j);
    return ForwardModel::mask(make_random_mask(g, j.value("observed_fraction", 0.5), rng));
  }
  if (type == "box_inpaint") {
    const GridShape g = grid_for(j);
    return ForwardModel::mask(make_box_mask(g, j.value("box_fraction", 0.12), rng));
  }
  if (type == "circular_conv") {
    const GridShape g = grid_for(j);
    const Json k = j.value("kernel", Json::object());
    return ForwardModel::circular_conv(make_gaussian_blur_kernel(k.value("sigma_blur", 1.0), k.value("size", 5)), g);
  }
  if (type == "linear_scattering") {
    const GridShape g = grid_for(j);
    Matrix h = make_scattering_propagator(g, j.value("decay", 2.0), j.value("n_receivers", g.size()), rng);
    Vector u_in = j.contains("u_in") ? to_vector(j.at("u_in"), "model.u_in") : Vector::Ones(dim);
    if (u_in.size() != dim) config_error("model.u_in does not match the prior dimension");
    return ForwardModel::linear_scattering(std::move(h), std::move(u_in));
  }
  if (type == "phase_retrieval") return ForwardModel::phase_retrieval(grid_for(j), j.value("eps_mag", 1e-8));
  config_error("model.type '" + type +
               "' is not one of identity, dense_linear, mask, box_inpaint, circular_conv, linear_scattering, "
               "phase_retrieval");
}

BuiltProblem build_problem(const RunConfig& cfg) {
  BuiltProblem out{parse_prior(cfg.prior), prior_grid(cfg.prior), nullptr, {}, {}, {}, 0.0, {}, 0};
  const Eigen::Index dim = out.prior.dim();
  if (!out.grid && cfg.model.contains("grid")) out.grid = parse_grid(cfg.model.at("grid"));

  Rng model_rng(stream_seed(cfg.seed, SeedStream::kModel));
  try {
    out.model = std::make_shared<const ForwardModel>(build_model(cfg.model, dim, out.grid, model_rng));
  } catch (const Json::exception& e) {
    config_error(std::string("model: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == "config_error") throw;
    config_error(std::string("model: ") + e.what());
  }

  const std::string source = cfg.ground_truth.value("source", std::string("prior_sample"));
  if (source == "prior_sample") {
    Rng rng(stream_seed(cfg.seed, SeedStream::kGroundTruth));
    out.x_true = gm_sample(out.prior, 1, rng).front();
  } else if (source == "csv") {
    std::filesystem::path p = cfg.ground_truth.at("path").get<std::string>();
    if (p.is_relative()) p = cfg.base_dir / p;
    const auto v = read_csv_column(p, cfg.ground_truth.value("column", std::string()));
    out.x_true = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else if (source == "values") {
    out.x_true = to_vector(cfg.ground_truth.at("values"), "ground_truth.values");
  } else {
    config_error("ground_truth.source '" + source + "' is not one of prior_sample, csv, values");
  }
  if (out.x_true.size() != dim) config_error("ground truth length does not match the prior dimension");
  if (!all_finite(out.x_true)) config_error("ground truth has non-finite entries");

  out.y_clean = out.model->apply(out.x_true);
  Rng noise_rng(stream_seed(cfg.seed, SeedStream::kNoise));
  out.corrupted = corrupt(out.y_clean, cfg.noise, noise_rng);
  out.likelihood_sigma = cfg.likelihood_sigma.value_or(nominal_sigma(cfg.noise));

  auto score = std::make_shared<const AnalyticGmScore>(out.prior, cfg.schedule);
  out.problem = make_problem(score, out.model, out.corrupted.y, out.likelihood_sigma, cfg.schedule);
  out.chain_master_seed = stream_seed(cfg.seed, SeedStream::kChains);
  return out;
}

}  // namespace rdp
