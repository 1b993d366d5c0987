// Command-line front end: simulate | fit | tune | eval | kappa | replicate.
// Every run writes the fully resolved configuration next to its outputs so a
// run is reproducible from (config bytes, seed) alone.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gds/estimator.hpp"
#include "gds/io.hpp"
#include "gds/metrics.hpp"
#include "gds/simulate.hpp"
#include "gds/theory.hpp"
#include "gds/tuning.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using Scalar = double;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct RunConfig {
  json raw = json::object();

  std::uint64_t seed = 1;
  std::string out = "out";

  gds::GridSpec<Scalar> grid = gds::GridSpec<Scalar>::midpoints(20, 20);
  gds::BasisSpec<Scalar> basis = gds::BasisSpec<Scalar>::piecewise(20, 20);
  gds::TransformVariant variant = gds::TransformVariant::Separable;
  int d1 = 3, d2 = 3;
  Scalar w = 1;
  Scalar lambda = 0.1;
  Scalar zero_threshold = 1e-8;
  bool refit = false;

  gds::BetaId beta = gds::BetaId::Beta2;
  std::string process = "P1";
  gds::Index n = 400;
  Scalar snr = 4;

  std::string criterion = "aic";
  gds::Index tune_count = 20;
  Scalar c_min = 0.05, c_max = 20;
  std::vector<Scalar> tune_ws;
  std::vector<std::pair<int, int>> tune_orders;
  gds::Index folds = 10;

  gds::Index trials = 10000;
  std::string fixture;
  gds::Index kappa_s = 1, kappa_s_prime = 1;

  std::string data_dir, val_dir, test_dir, fit_dir, truth_path;
  gds::Index replicates = 5;
  gds::Index test_size = 10000;
};

gds::BasisSpec<Scalar> parse_basis(const json& j) {
  const std::string kind = j.value("kind", "piecewise");
  if (kind == "piecewise")
    return gds::BasisSpec<Scalar>::piecewise(j.value("p1", 20), j.value("p2", 20));
  if (kind == "bspline")
    return gds::BasisSpec<Scalar>::bspline(j.value("order1", 3), j.value("order2", 3),
                                           j.value("knots1", 7), j.value("knots2", 7));
  throw std::invalid_argument("config: basis.kind must be 'piecewise' or 'bspline'");
}

json basis_to_json(const gds::BasisSpec<Scalar>& b) {
  json j;
  if (b.kind == gds::BasisKind::Piecewise) {
    j["kind"] = "piecewise";
    j["p1"] = b.p1;
    j["p2"] = b.p2;
  } else {
    j["kind"] = "bspline";
    j["order1"] = b.order1;
    j["order2"] = b.order2;
    j["knots1"] = b.interior_knots1;
    j["knots2"] = b.interior_knots2;
  }
  return j;
}

gds::BetaId parse_beta(const std::string& name) {
  if (name == "beta1") return gds::BetaId::Beta1;
  if (name == "beta2") return gds::BetaId::Beta2;
  if (name == "beta3") return gds::BetaId::Beta3;
  throw std::invalid_argument("config: scenario.beta must be beta1|beta2|beta3");
}

gds::PredictorProcess<Scalar> parse_process(const std::string& name) {
  if (name == "P1") return gds::PredictorProcess<Scalar>::p1();
  if (name == "P2") return gds::PredictorProcess<Scalar>::p2();
  throw std::invalid_argument("config: scenario.process must be P1|P2");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw gds::io::IoError("cannot open config: " + path);
  is >> cfg.raw;

  const json& j = cfg.raw;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out = j.value("out", cfg.out);
  if (j.contains("grid"))
    cfg.grid = gds::GridSpec<Scalar>::midpoints(j["grid"].value("m1", 20), j["grid"].value("m2", 20));
  if (j.contains("basis")) cfg.basis = parse_basis(j["basis"]);
  if (j.contains("variant")) {
    const std::string v = j["variant"];
    if (v == "joint") cfg.variant = gds::TransformVariant::Joint;
    else if (v == "separable") cfg.variant = gds::TransformVariant::Separable;
    else throw std::invalid_argument("config: variant must be joint|separable");
  }
  cfg.d1 = j.value("d1", cfg.d1);
  cfg.d2 = j.value("d2", cfg.d2);
  cfg.w = j.value("w", cfg.w);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.zero_threshold = j.value("zero_threshold", cfg.zero_threshold);
  cfg.refit = j.value("refit", cfg.refit);
  if (j.contains("scenario")) {
    const json& s = j["scenario"];
    cfg.beta = parse_beta(s.value("beta", "beta2"));
    cfg.process = s.value("process", cfg.process);
    cfg.n = s.value("n", cfg.n);
    cfg.snr = s.value("snr", cfg.snr);
  }
  if (j.contains("tune")) {
    const json& t = j["tune"];
    cfg.criterion = t.value("criterion", cfg.criterion);
    cfg.tune_count = t.value("count", cfg.tune_count);
    cfg.c_min = t.value("c_min", cfg.c_min);
    cfg.c_max = t.value("c_max", cfg.c_max);
    if (t.contains("ws")) cfg.tune_ws = t["ws"].get<std::vector<Scalar>>();
    if (t.contains("orders"))
      for (const auto& o : t["orders"]) cfg.tune_orders.emplace_back(o.at(0), o.at(1));
    cfg.folds = t.value("folds", cfg.folds);
  }
  cfg.trials = j.value("trials", cfg.trials);
  cfg.fixture = j.value("fixture", cfg.fixture);
  cfg.kappa_s = j.value("kappa_s", cfg.kappa_s);
  cfg.kappa_s_prime = j.value("kappa_s_prime", cfg.kappa_s_prime);
  cfg.data_dir = j.value("data", cfg.data_dir);
  cfg.val_dir = j.value("val", cfg.val_dir);
  cfg.test_dir = j.value("test", cfg.test_dir);
  cfg.fit_dir = j.value("fit", cfg.fit_dir);
  cfg.truth_path = j.value("truth", cfg.truth_path);
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.test_size = j.value("test_size", cfg.test_size);
}

json resolve_config(const RunConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["grid"] = {{"m1", cfg.grid.m1}, {"m2", cfg.grid.m2}, {"t0", cfg.grid.t0}, {"s0", cfg.grid.s0},
               {"delta1", cfg.grid.delta1}, {"delta2", cfg.grid.delta2}};
  j["basis"] = basis_to_json(cfg.basis);
  j["variant"] = cfg.variant == gds::TransformVariant::Joint ? "joint" : "separable";
  j["d1"] = cfg.d1;
  j["d2"] = cfg.d2;
  j["w"] = cfg.w;
  j["lambda"] = cfg.lambda;
  j["zero_threshold"] = cfg.zero_threshold;
  j["refit"] = cfg.refit;
  j["scenario"] = {{"beta", gds::to_string(cfg.beta)}, {"process", cfg.process},
                   {"n", cfg.n}, {"snr", cfg.snr}};
  j["tune"] = {{"criterion", cfg.criterion}, {"count", cfg.tune_count}, {"c_min", cfg.c_min},
               {"c_max", cfg.c_max}, {"folds", cfg.folds}};
  if (!cfg.tune_ws.empty()) j["tune"]["ws"] = cfg.tune_ws;
  if (!cfg.tune_orders.empty()) {
    json arr = json::array();
    for (const auto& [a, b] : cfg.tune_orders) arr.push_back({a, b});
    j["tune"]["orders"] = arr;
  }
  j["trials"] = cfg.trials;
  if (!cfg.fixture.empty()) j["fixture"] = cfg.fixture;
  if (!cfg.data_dir.empty()) j["data"] = cfg.data_dir;
  if (!cfg.val_dir.empty()) j["val"] = cfg.val_dir;
  if (!cfg.test_dir.empty()) j["test"] = cfg.test_dir;
  if (!cfg.fit_dir.empty()) j["fit"] = cfg.fit_dir;
  if (!cfg.truth_path.empty()) j["truth"] = cfg.truth_path;
  j["replicates"] = cfg.replicates;
  j["test_size"] = cfg.test_size;
  return j;
}

void write_resolved(const RunConfig& cfg, const std::string& command) {
  fs::create_directories(cfg.out);
  std::ofstream os(fs::path(cfg.out) / "config_resolved.json", std::ios::binary);
  if (!os) throw gds::io::IoError("cannot write resolved config under " + cfg.out);
  os << resolve_config(cfg, command).dump(2) << '\n';
}

gds::SimScenario<Scalar> make_scenario(const RunConfig& cfg) {
  gds::SimScenario<Scalar> scn;
  scn.beta = cfg.beta;
  scn.process = parse_process(cfg.process);
  scn.n = cfg.n;
  scn.snr_target = cfg.snr;
  scn.grid = cfg.grid;
  scn.seed = cfg.seed;
  return scn;
}

struct LoadedDataset {
  gds::GridSpec<Scalar> grid;
  std::vector<gds::ImageSample<Scalar>> images;
  gds::VectorX<Scalar> y;
  gds::VectorX<Scalar> weights;
};

LoadedDataset load_dataset(const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("a dataset directory is required (--data/--test/--val)");
  LoadedDataset d;
  std::string mask_path;
  d.grid = gds::io::read_grid_csv(fs::path(dir) / "grid.csv", &mask_path);
  d.images = gds::io::read_images_csv(fs::path(dir) / "images.csv", d.grid);
  const fs::path resp = fs::path(dir) / "responses.csv";
  if (fs::exists(resp)) d.y = gds::io::read_responses_csv(resp);
  if (!mask_path.empty()) {
    const std::vector<bool> mask = gds::io::read_mask_csv(fs::path(dir) / mask_path, d.grid);
    d.weights = gds::quadrature_weights(d.grid, &mask);
  } else {
    d.weights = gds::quadrature_weights<Scalar>(d.grid);
  }
  return d;
}

gds::GdsConfig<Scalar> estimator_config(const RunConfig& cfg) {
  gds::GdsConfig<Scalar> ec;
  ec.basis = cfg.basis;
  ec.grid = cfg.grid;
  ec.variant = cfg.variant;
  ec.d1 = cfg.d1;
  ec.d2 = cfg.d2;
  ec.w = cfg.w;
  ec.lambda = cfg.lambda;
  ec.zero_threshold = cfg.zero_threshold;
  return ec;
}

void write_fit_outputs(const RunConfig& cfg, const gds::GdsFit<Scalar>& fit, bool refitted,
                       gds::Index zero_set_size) {
  const fs::path out(cfg.out);
  gds::io::write_eta_csv(out / "eta.csv", fit.eta_hat);
  const gds::SurfaceValues<Scalar> surf = gds::evaluate_surface(fit, cfg.grid);
  gds::io::write_surface_csv(out / "surface.csv", cfg.grid, surf.raw, surf.truncated);

  gds::io::ReportTable summary;
  summary.header = {"alpha_hat", "lambda", "w", "d1", "d2", "variant", "active_count",
                    "objective", "primal_residual", "sigma_min", "d_max", "dropped_columns",
                    "refit", "zero_set_size"};
  summary.rows.push_back({gds::io::format_double(fit.alpha_hat),
                          gds::io::format_double(fit.config.lambda),
                          gds::io::format_double(fit.config.w), std::to_string(fit.config.d1),
                          std::to_string(fit.config.d2),
                          fit.config.variant == gds::TransformVariant::Joint ? "joint" : "separable",
                          std::to_string(fit.active_set.size()),
                          gds::io::format_double(fit.diagnostics.objective),
                          gds::io::format_double(fit.diagnostics.primal_residual),
                          gds::io::format_double(fit.diagnostics.sigma_min),
                          gds::io::format_double(fit.diagnostics.d_max),
                          std::to_string(fit.diagnostics.dropped_columns.size()),
                          refitted ? "1" : "0", std::to_string(zero_set_size)});
  gds::io::write_report_csv(out / "summary.csv", summary);
}

int cmd_simulate(const RunConfig& cfg) {
  const auto scn = make_scenario(cfg);
  const auto data = gds::generate_dataset(scn);
  const fs::path out(cfg.out);
  fs::create_directories(out);
  gds::io::write_grid_csv(out / "grid.csv", scn.grid);
  gds::io::write_images_csv(out / "images.csv", data.images, scn.grid);
  gds::io::write_responses_csv(out / "responses.csv", data.y);
  const gds::VectorX<Scalar> truth = scn.truth_on_grid();
  gds::VectorX<Scalar> truncated = truth;
  for (gds::Index j = 0; j < truncated.size(); ++j)
    if (std::abs(truncated[j]) < cfg.zero_threshold) truncated[j] = 0;
  gds::io::write_surface_csv(out / "truth.csv", scn.grid, truth, truncated);
  gds::io::ReportTable noise;
  noise.header = {"sigma", "snr_target"};
  noise.rows.push_back({gds::io::format_double(data.sigma), gds::io::format_double(scn.snr_target)});
  gds::io::write_report_csv(out / "noise.csv", noise);
  write_resolved(cfg, "simulate");
  return kExitOk;
}

int cmd_fit(const RunConfig& cfg) {
  const LoadedDataset d = load_dataset(cfg.data_dir);
  RunConfig local = cfg;
  local.grid = d.grid;
  const gds::BasisMatrix<Scalar> bt = gds::basis_matrix(local.basis, d.grid);
  gds::DesignSet<Scalar> ds = gds::center(gds::design_matrix(d.images, bt, d.weights), d.y);
  ds.quad_weights = d.weights;
  gds::GdsFit<Scalar> fit = gds::fit(ds, estimator_config(local));
  bool refitted = false;
  gds::Index zero_set = 0;
  if (cfg.refit) {
    const gds::SurfaceValues<Scalar> surf = gds::evaluate_surface(fit, d.grid);
    for (gds::Index j = 0; j < surf.truncated.size(); ++j)
      if (surf.truncated[j] == 0) ++zero_set;
    fit = gds::refit(fit, ds, fit.config.lambda);
    refitted = true;
    if (zero_set == 0) std::cerr << "note: empty zero set, refit reduces to w = 0 re-solve\n";
  }
  fs::create_directories(cfg.out);
  write_fit_outputs(local, fit, refitted, zero_set);
  write_resolved(local, "fit");
  return kExitOk;
}

int cmd_tune(const RunConfig& cfg) {
  const LoadedDataset d = load_dataset(cfg.data_dir);
  RunConfig local = cfg;
  local.grid = d.grid;
  const gds::BasisMatrix<Scalar> bt = gds::basis_matrix(local.basis, d.grid);
  gds::DesignSet<Scalar> ds = gds::center(gds::design_matrix(d.images, bt, d.weights), d.y);
  ds.quad_weights = d.weights;

  gds::TuneGrid<Scalar> grid;
  grid.lambdas = gds::lambda_grid<Scalar>(ds.n(), ds.p(), local.tune_count, local.c_min, local.c_max);
  grid.ws = local.tune_ws;
  grid.orders = local.tune_orders;
  const gds::GdsConfig<Scalar> base = estimator_config(local);

  gds::TuneResult<Scalar> result;
  if (local.criterion == "val") {
    const LoadedDataset v = load_dataset(local.val_dir);
    const gds::BasisMatrix<Scalar> btv = gds::basis_matrix(local.basis, v.grid);
    gds::DesignSet<Scalar> vs = gds::center(gds::design_matrix(v.images, btv, v.weights), v.y);
    result = gds::select_validation(ds, vs, grid, base);
  } else if (local.criterion == "aic") {
    result = gds::select_aic(ds, grid, base);
  } else if (local.criterion == "cv") {
    result = gds::kfold_cv(ds.x, ds.y, local.folds, grid, local.seed, base);
  } else {
    throw std::invalid_argument("tune: criterion must be val|aic|cv");
  }

  const fs::path out(cfg.out);
  fs::create_directories(out);
  gds::io::ReportTable scores;
  scores.header = {"lambda", "w", "d1", "d2", "score"};
  for (const auto& sc : result.scores)
    scores.rows.push_back({gds::io::format_double(sc.config.lambda),
                           gds::io::format_double(sc.config.w), std::to_string(sc.config.d1),
                           std::to_string(sc.config.d2), gds::io::format_double(sc.score)});
  gds::io::write_report_csv(out / "scores.csv", scores);
  gds::io::ReportTable sel;
  sel.header = {"criterion", "lambda", "w", "d1", "d2"};
  sel.rows.push_back({gds::to_string(result.criterion),
                      gds::io::format_double(result.best_config.lambda),
                      gds::io::format_double(result.best_config.w),
                      std::to_string(result.best_config.d1), std::to_string(result.best_config.d2)});
  gds::io::write_report_csv(out / "selected.csv", sel);
  write_resolved(local, "tune");
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg) {
  gds::io::ReportTable metrics;
  metrics.header = {"metric", "value"};

  const bool have_truth = !cfg.truth_path.empty() && fs::exists(cfg.truth_path);
  std::optional<gds::io::SurfaceFile> fit_surface;
  gds::GridSpec<Scalar> grid = cfg.grid;
  if (!cfg.fit_dir.empty()) {
    std::ifstream is(fs::path(cfg.fit_dir) / "config_resolved.json");
    if (is) {
      json j;
      is >> j;
      grid = gds::GridSpec<Scalar>::midpoints(j["grid"]["m1"], j["grid"]["m2"]);
    }
    fit_surface = gds::io::read_surface_csv(fs::path(cfg.fit_dir) / "surface.csv");
  }

  if (have_truth) {
    if (!fit_surface.has_value())
      throw std::invalid_argument("eval: --fit directory with surface.csv is required");
    const gds::io::SurfaceFile truth = gds::io::read_surface_csv(cfg.truth_path);
    const gds::VectorX<Scalar> weights = gds::quadrature_weights<Scalar>(grid);
    gds::SurfacePair<Scalar> pair{truth.raw, fit_surface->truncated, weights};
    metrics.rows.push_back({"rise", gds::io::format_double(gds::rise(pair))});
    metrics.rows.push_back(
        {"r1", gds::io::format_double(gds::zero_recovery_r1(pair, cfg.zero_threshold))});
    metrics.rows.push_back(
        {"r2", gds::io::format_double(gds::nonzero_recovery_r2(pair, cfg.zero_threshold))});
  }

  if (!cfg.test_dir.empty()) {
    const LoadedDataset t = load_dataset(cfg.test_dir);
    if (t.y.size() == 0) throw std::invalid_argument("eval: test dataset lacks responses.csv");
    const gds::VectorX<Scalar> eta = gds::io::read_eta_csv(fs::path(cfg.fit_dir) / "eta.csv");
    std::ifstream is(fs::path(cfg.fit_dir) / "config_resolved.json");
    if (!is) throw gds::io::IoError("eval: fit directory lacks config_resolved.json");
    json j;
    is >> j;
    const gds::BasisSpec<Scalar> basis = parse_basis(j["basis"]);
    std::ifstream sis(fs::path(cfg.fit_dir) / "summary.csv");
    // alpha_hat is the first column of the summary row
    std::string header, row;
    std::getline(sis, header);
    std::getline(sis, row);
    const Scalar alpha = std::stod(row.substr(0, row.find(',')));
    const gds::BasisMatrix<Scalar> bt = gds::basis_matrix(basis, t.grid);
    const gds::MatrixX<Scalar> x = gds::design_matrix(t.images, bt, t.weights);
    const gds::VectorX<Scalar> y_hat = (x * eta).array() + alpha;
    if (have_truth) {
      metrics.rows.push_back({"mse", gds::io::format_double(gds::mse(y_hat, t.y))});
    } else {
      const auto [rmse, mae] = gds::rmse_mae(y_hat, t.y);
      metrics.rows.push_back({"rmse", gds::io::format_double(rmse)});
      metrics.rows.push_back({"mae", gds::io::format_double(mae)});
    }
  } else if (!have_truth) {
    throw std::invalid_argument("eval: need --truth for surface metrics or --test for prediction metrics");
  }

  fs::create_directories(cfg.out);
  gds::io::write_report_csv(fs::path(cfg.out) / "metrics.csv", metrics);
  write_resolved(cfg, "eval");
  return kExitOk;
}

int cmd_kappa(const RunConfig& cfg) {
  gds::MatrixX<Scalar> v;
  gds::KappaOptions<Scalar> opts;
  if (cfg.fixture == "supp92") {
    const auto rd = gds::reference_design_supp92<Scalar>();
    v = rd.v;
    // Reproduction settings for the bundled design: the cone search is
    // restricted to the difference coordinate and draws sit on the l1
    // boundary, where the minimum concentrates tightly.
    opts.support = {v.cols() - 1};
    opts.boundary = true;
  } else if (!cfg.fixture.empty()) {
    throw std::invalid_argument("kappa: unknown fixture '" + cfg.fixture + "' (available: supp92)");
  } else {
    if (cfg.data_dir.empty())
      throw std::invalid_argument("kappa: need --data with a dataset or --fixture supp92");
    const LoadedDataset d = load_dataset(cfg.data_dir);
    const gds::BasisMatrix<Scalar> bt = gds::basis_matrix(cfg.basis, d.grid);
    const gds::TransformA<Scalar> a =
        gds::assemble_transform(cfg.variant, cfg.w, cfg.d1, cfg.d2, d.grid, bt);
    const gds::MatrixX<Scalar> x = gds::design_matrix(d.images, bt, d.weights);
    v = x * gds::pseudoinverse(a);
  }

  const auto k1 = gds::estimate_kappa(v, gds::KappaKind::Kappa1, cfg.kappa_s, 0, cfg.trials,
                                      cfg.seed, opts);
  const auto k2 = gds::estimate_kappa(v, gds::KappaKind::Kappa2, cfg.kappa_s, cfg.kappa_s_prime,
                                      cfg.trials, gds::derive_seed(cfg.seed, 1), opts);

  fs::create_directories(cfg.out);
  gds::io::ReportTable table;
  table.header = {"which", "s", "s_prime", "value", "trials", "seed"};
  table.rows.push_back({"kappa1", std::to_string(k1.s), "", gds::io::format_double(k1.value),
                        std::to_string(k1.trials), std::to_string(k1.seed)});
  table.rows.push_back({"kappa2", std::to_string(k2.s), std::to_string(k2.s_prime),
                        gds::io::format_double(k2.value), std::to_string(k2.trials),
                        std::to_string(k2.seed)});
  gds::io::write_report_csv(fs::path(cfg.out) / "kappa.csv", table);
  write_resolved(cfg, "kappa");
  return kExitOk;
}

int cmd_replicate(const RunConfig& cfg) {
  const auto scn = make_scenario(cfg);
  const gds::GdsConfig<Scalar> base = estimator_config(cfg);
  RunConfig local = cfg;

  gds::EstimatorFn<Scalar> estimator = [&](const gds::TrainData<Scalar>& train) {
    gds::DesignSet<Scalar> ds = gds::make_design(train, base.basis);
    if (local.criterion == "fixed") {
      gds::GdsFit<Scalar> f = gds::fit(ds, base);
      return local.refit ? gds::refit(f, ds, f.config.lambda) : f;
    }
    gds::TuneGrid<Scalar> grid;
    grid.lambdas =
        gds::lambda_grid<Scalar>(ds.n(), ds.p(), local.tune_count, local.c_min, local.c_max);
    grid.ws = local.tune_ws;
    grid.orders = local.tune_orders;
    gds::TuneResult<Scalar> tuned;
    if (local.criterion == "aic") {
      tuned = gds::select_aic(ds, grid, base);
    } else if (local.criterion == "cv") {
      tuned = gds::kfold_cv(ds.x, ds.y, local.folds, grid, local.seed, base);
    } else {
      throw std::invalid_argument("replicate: criterion must be fixed|aic|cv");
    }
    gds::GdsFit<Scalar> f = gds::fit(ds, tuned.best_config);
    return local.refit ? gds::refit(f, ds, f.config.lambda) : f;
  };

  const auto report = gds::run_replicated(scn, estimator, cfg.replicates, cfg.test_size,
                                          cfg.zero_threshold);

  fs::create_directories(cfg.out);
  gds::io::ReportTable rows;
  rows.header = {"replicate", "ok", "mse", "rise", "r1", "r2", "error"};
  for (const auto& r : report.rows)
    rows.rows.push_back({std::to_string(r.replicate), r.ok ? "1" : "0",
                         gds::io::format_double(r.mse), gds::io::format_double(r.rise),
                         gds::io::format_double(r.r1), gds::io::format_double(r.r2), r.error});
  gds::io::write_report_csv(fs::path(cfg.out) / "report.csv", rows);

  gds::io::ReportTable summary;
  summary.header = {"metric", "mean", "se", "successes", "failures", "sigma"};
  auto push = [&](const char* name, Scalar mean, Scalar se) {
    summary.rows.push_back({name, gds::io::format_double(mean),
                            report.rows.size() - report.failures > 1 ? gds::io::format_double(se) : "",
                            std::to_string(report.rows.size() - report.failures),
                            std::to_string(report.failures), gds::io::format_double(report.sigma)});
  };
  push("mse", report.mean_mse, report.se_mse);
  push("rise", report.mean_rise, report.se_rise);
  push("r1", report.mean_r1, report.se_r1);
  push("r2", report.mean_r2, report.se_r2);
  gds::io::write_report_csv(fs::path(cfg.out) / "summary.csv", summary);
  write_resolved(cfg, "replicate");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-and-smooth coefficient surface estimation for scalar-on-image regression"};
  app.require_subcommand(1);

  std::string config_path;
  RunConfig cfg;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::string> out_flag, basis_flag, variant_flag, criterion_flag, fixture_flag;
  std::optional<Scalar> lambda_flag, w_flag;
  std::optional<std::string> orders_flag;
  std::optional<gds::Index> trials_flag;
  bool refit_flag = false;
  std::optional<std::string> data_flag, val_flag, test_flag, fit_flag, truth_flag;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed_flag, "random seed override");
  app.add_option("--out", out_flag, "output directory override");
  app.add_option("--lambda", lambda_flag, "constraint level override");
  app.add_option("--w", w_flag, "sparsity weight override");
  app.add_option("--orders", orders_flag, "difference orders d1,d2");
  app.add_option("--basis", basis_flag, "basis kind: bspline|piecewise");
  app.add_option("--variant", variant_flag, "transform variant: joint|separable");
  app.add_flag("--refit", refit_flag, "apply the zero-set pinned refit");
  app.add_option("--criterion", criterion_flag, "tuning criterion: val|aic|cv (replicate: fixed|aic|cv)");
  app.add_option("--trials", trials_flag, "Monte-Carlo trial count");
  app.add_option("--fixture", fixture_flag, "bundled reference design name");
  app.add_option("--data", data_flag, "input dataset directory");
  app.add_option("--val", val_flag, "validation dataset directory");
  app.add_option("--test", test_flag, "test dataset directory");
  app.add_option("--fit", fit_flag, "fit output directory to evaluate");
  app.add_option("--truth", truth_flag, "truth surface CSV");

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  auto* fit_cmd = app.add_subcommand("fit", "fit the estimator on a dataset");
  auto* tune = app.add_subcommand("tune", "select tuning parameters");
  auto* eval = app.add_subcommand("eval", "evaluate a fit against truth or test data");
  auto* kappa = app.add_subcommand("kappa", "estimate restricted eigenvalues");
  auto* replicate = app.add_subcommand("replicate", "run a replicated simulation study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (seed_flag) cfg.seed = *seed_flag;
    if (out_flag) cfg.out = *out_flag;
    if (lambda_flag) cfg.lambda = *lambda_flag;
    if (w_flag) cfg.w = *w_flag;
    if (orders_flag) {
      const auto comma = orders_flag->find(',');
      if (comma == std::string::npos) throw std::invalid_argument("--orders expects d1,d2");
      cfg.d1 = std::stoi(orders_flag->substr(0, comma));
      cfg.d2 = std::stoi(orders_flag->substr(comma + 1));
    }
    if (basis_flag) {
      json j = cfg.raw.value("basis", json::object());
      j["kind"] = *basis_flag;
      cfg.basis = parse_basis(j);
    }
    if (variant_flag) {
      if (*variant_flag == "joint") cfg.variant = gds::TransformVariant::Joint;
      else if (*variant_flag == "separable") cfg.variant = gds::TransformVariant::Separable;
      else throw std::invalid_argument("--variant must be joint|separable");
    }
    if (refit_flag) cfg.refit = true;
    if (criterion_flag) cfg.criterion = *criterion_flag;
    if (trials_flag) cfg.trials = *trials_flag;
    if (fixture_flag) cfg.fixture = *fixture_flag;
    if (data_flag) cfg.data_dir = *data_flag;
    if (val_flag) cfg.val_dir = *val_flag;
    if (test_flag) cfg.test_dir = *test_flag;
    if (fit_flag) cfg.fit_dir = *fit_flag;
    if (truth_flag) cfg.truth_path = *truth_flag;

    if (sim->parsed()) return cmd_simulate(cfg);
    if (fit_cmd->parsed()) return cmd_fit(cfg);
    if (tune->parsed()) return cmd_tune(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (kappa->parsed()) return cmd_kappa(cfg);
    if (replicate->parsed()) return cmd_replicate(cfg);
    return kExitUsage;
  } catch (const gds::SolveError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const gds::io::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
