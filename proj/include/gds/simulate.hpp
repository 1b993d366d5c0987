#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gds/bsplines.hpp"
#include "gds/design.hpp"
#include "gds/estimator.hpp"
#include "gds/metrics.hpp"

namespace gds {

/// Independent substream seed derived from (seed, index) by splitmix64, so
/// parallel replicate runs match serial ones.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

enum class BetaId { Beta1, Beta2, Beta3 };

namespace detail {

template <class Scalar>
Scalar beta1_factor(Scalar t) {
  const Scalar pi = Scalar(3.14159265358979323846);
  const Scalar s4 = std::sin(pi / Scalar(4));
  if (t <= Scalar(0.25)) return std::sin(pi * t) - s4;
  if (t >= Scalar(0.75)) return s4 - std::sin(pi * t);
  return Scalar(0);
}

template <class Scalar>
Scalar beta2_factor(Scalar t) {
  if (t < Scalar(0.3) || t > Scalar(0.7)) return Scalar(0);
  const Scalar u = t - Scalar(0.5);
  return Scalar(100) * (std::exp(u * u) - std::exp(Scalar(0.04)));
}

}  // namespace detail

/// Closed-form test surfaces. The third surface is supported on two discs of
/// radius 0.2 centered at (0.6, 0.4) and (0.4, 0.6); the discs overlap, and
/// points in the lens take the branch of the nearer center (zero on the
/// equidistant diagonal), which keeps beta3(t,s) = -beta3(s,t) exact.
template <class Scalar>
Scalar beta_eval(BetaId id, Scalar t, Scalar s) {
  if (t < Scalar(0) || t > Scalar(1) || s < Scalar(0) || s > Scalar(1))
    throw std::domain_error("beta_eval: coordinates outside [0,1]^2");
  switch (id) {
    case BetaId::Beta1:
      return detail::beta1_factor(t) * detail::beta1_factor(s);
    case BetaId::Beta2:
      return detail::beta2_factor(t) * detail::beta2_factor(s);
    case BetaId::Beta3: {
      const Scalar r2 = Scalar(0.04);
      const Scalar q1 = (t - Scalar(0.6)) * (t - Scalar(0.6)) + (s - Scalar(0.4)) * (s - Scalar(0.4));
      const Scalar q2 = (t - Scalar(0.4)) * (t - Scalar(0.4)) + (s - Scalar(0.6)) * (s - Scalar(0.6));
      const bool in1 = q1 <= r2, in2 = q2 <= r2;
      if (in1 && in2) {
        if (q1 < q2) return Scalar(200) * (q1 - r2);
        if (q2 < q1) return Scalar(200) * (r2 - q2);
        return Scalar(0);
      }
      if (in1) return Scalar(200) * (q1 - r2);
      if (in2) return Scalar(200) * (r2 - q2);
      return Scalar(0);
    }
  }
  return Scalar(0);
}

inline const char* to_string(BetaId id) {
  switch (id) {
    case BetaId::Beta1: return "beta1";
    case BetaId::Beta2: return "beta2";
    case BetaId::Beta3: return "beta3";
  }
  return "unknown";
}

/// Random predictor surfaces x(t,s) = sum_jk a_jk psi_j(t) psi_k(s) with
/// standard normal coefficients and a univariate B-spline family psi of the
/// given spline order (degree + 1) and interior knot count.
template <class Scalar>
struct PredictorProcess {
  std::string id;
  int order = 4;          // spline order: degree + 1
  Index interior_knots = 6;

  Index m() const { return interior_knots + order; }

  static PredictorProcess p1() { return {"P1", 4, 6}; }    // m = 10
  static PredictorProcess p2() { return {"P2", 5, 15}; }   // m = 20

  BsplineFamily<Scalar> family() const { return BsplineFamily<Scalar>(order - 1, interior_knots); }
};

/// Basis values of the process family at the grid's t and s coordinates.
template <class Scalar>
struct ProcessTables {
  MatrixX<Scalar> psi_t;  // m1 x m
  MatrixX<Scalar> psi_s;  // m2 x m
};

template <class Scalar>
ProcessTables<Scalar> process_tables(const PredictorProcess<Scalar>& process, const GridSpec<Scalar>& grid) {
  const BsplineFamily<Scalar> fam = process.family();
  ProcessTables<Scalar> tables;
  tables.psi_t.resize(grid.m1, fam.count());
  tables.psi_s.resize(grid.m2, fam.count());
  for (Index k = 0; k < grid.m1; ++k) tables.psi_t.row(k) = fam.eval(grid.point(k, 0).first).transpose();
  for (Index l = 0; l < grid.m2; ++l) tables.psi_s.row(l) = fam.eval(grid.point(0, l).second).transpose();
  return tables;
}

template <class Scalar>
ImageSample<Scalar> sample_predictor(const PredictorProcess<Scalar>& process, const GridSpec<Scalar>& grid,
                                     std::mt19937_64& rng) {
  const ProcessTables<Scalar> tables = process_tables(process, grid);
  return sample_predictor(process, grid, tables, rng);
}

template <class Scalar>
ImageSample<Scalar> sample_predictor(const PredictorProcess<Scalar>& process, const GridSpec<Scalar>& grid,
                                     const ProcessTables<Scalar>& tables, std::mt19937_64& rng) {
  const Index m = process.m();
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixX<Scalar> coef(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < m; ++k) coef(j, k) = Scalar(normal(rng));
  const MatrixX<Scalar> surface = tables.psi_t * coef * tables.psi_s.transpose();  // m1 x m2
  ImageSample<Scalar> img;
  img.values.resize(grid.size());
  for (Index k = 0; k < grid.m1; ++k)
    for (Index l = 0; l < grid.m2; ++l) img.values[k * grid.m2 + l] = surface(k, l);
  return img;
}

/// Generator description for one simulation setting.
template <class Scalar>
struct SimScenario {
  BetaId beta = BetaId::Beta2;
  PredictorProcess<Scalar> process = PredictorProcess<Scalar>::p1();
  Index n = 400;
  Scalar snr_target = 4;
  GridSpec<Scalar> grid = GridSpec<Scalar>::midpoints(20, 20);
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 1) throw std::invalid_argument("SimScenario: n must be positive");
    if (snr_target <= Scalar(0)) throw std::invalid_argument("SimScenario: snr target must be positive");
    grid.validate();
  }

  VectorX<Scalar> truth_on_grid() const {
    VectorX<Scalar> b(grid.size());
    for (Index j = 0; j < grid.size(); ++j) {
      const auto [t, s] = grid.point(j);
      b[j] = beta_eval(beta, t, s);
    }
    return b;
  }
};

/// Signal value f(x) = quadrature integral of x * beta over the grid.
template <class Scalar>
Scalar signal_value(const ImageSample<Scalar>& img, const VectorX<Scalar>& truth,
                    const VectorX<Scalar>& weights) {
  return img.values.cwiseProduct(weights).dot(truth);
}

/// Noise level matching the target signal-to-noise ratio, calibrated from a
/// pilot Monte-Carlo sample of the signal distribution.
template <class Scalar>
Scalar calibrate_noise(const SimScenario<Scalar>& scenario, Index n_pilot = 10000) {
  scenario.validate();
  if (n_pilot < 100) throw std::invalid_argument("calibrate_noise: need at least 100 pilot draws");
  std::mt19937_64 rng(derive_seed(scenario.seed, 0x70696c6f74ull));  // dedicated pilot stream
  const ProcessTables<Scalar> tables = process_tables(scenario.process, scenario.grid);
  const VectorX<Scalar> truth = scenario.truth_on_grid();
  const VectorX<Scalar> weights = quadrature_weights(scenario.grid);
  VectorX<Scalar> f(n_pilot);
  for (Index i = 0; i < n_pilot; ++i)
    f[i] = signal_value(sample_predictor(scenario.process, scenario.grid, tables, rng), truth, weights);
  const Scalar mean = f.mean();
  const Scalar var = (f.array() - mean).square().sum() / Scalar(n_pilot - 1);
  if (var <= Scalar(0)) throw std::runtime_error("calibrate_noise: pilot signal variance is degenerate");
  return std::sqrt(var / scenario.snr_target);
}

template <class Scalar>
struct SimDataset {
  std::vector<ImageSample<Scalar>> images;
  VectorX<Scalar> y;
  VectorX<Scalar> f_true;  // noiseless signal, kept for oracle checks
  Scalar sigma = 0;
};

/// y_i = f(x_i) + eps_i with eps ~ N(0, sigma^2); deterministic under the
/// scenario seed (stream index 0 reserved for replicate derivation).
template <class Scalar>
SimDataset<Scalar> generate_dataset(const SimScenario<Scalar>& scenario,
                                    std::optional<Scalar> sigma = std::nullopt,
                                    std::uint64_t stream = 0) {
  scenario.validate();
  SimDataset<Scalar> data;
  data.sigma = sigma.has_value() ? *sigma : calibrate_noise(scenario);
  std::mt19937_64 rng(derive_seed(scenario.seed, stream));
  const ProcessTables<Scalar> tables = process_tables(scenario.process, scenario.grid);
  const VectorX<Scalar> truth = scenario.truth_on_grid();
  const VectorX<Scalar> weights = quadrature_weights(scenario.grid);
  std::normal_distribution<double> normal(0.0, 1.0);
  data.images.reserve(static_cast<size_t>(scenario.n));
  data.f_true.resize(scenario.n);
  data.y.resize(scenario.n);
  for (Index i = 0; i < scenario.n; ++i) {
    ImageSample<Scalar> img = sample_predictor(scenario.process, scenario.grid, tables, rng);
    img.id = std::to_string(i);
    data.f_true[i] = signal_value(img, truth, weights);
    data.images.push_back(std::move(img));
  }
  for (Index i = 0; i < scenario.n; ++i) data.y[i] = data.f_true[i] + data.sigma * Scalar(normal(rng));
  return data;
}

/// Training material handed to an estimator under study.
template <class Scalar>
struct TrainData {
  const SimDataset<Scalar>& data;
  const GridSpec<Scalar>& grid;
  const VectorX<Scalar>& weights;
};

/// Centered design for the training images under a chosen basis.
template <class Scalar>
DesignSet<Scalar> make_design(const TrainData<Scalar>& train, const BasisSpec<Scalar>& basis) {
  const BasisMatrix<Scalar> bt = basis_matrix(basis, train.grid);
  DesignSet<Scalar> ds = center(design_matrix(train.data.images, bt, train.weights), train.data.y);
  ds.quad_weights = train.weights;
  return ds;
}

/// One estimator under study: maps training data to a fit. External
/// estimators plug in through the same signature.
template <class Scalar>
using EstimatorFn = std::function<GdsFit<Scalar>(const TrainData<Scalar>&)>;

template <class Scalar>
struct ReplicateRow {
  Index replicate = 0;
  bool ok = false;
  std::string error;
  Scalar mse = 0;
  Scalar rise = 0;
  Scalar r1 = 0;
  Scalar r2 = 0;
};

template <class Scalar>
struct ReplicateReport {
  std::vector<ReplicateRow<Scalar>> rows;
  Index failures = 0;
  Scalar sigma = 0;
  // Means and standard errors over successful replicates; SEs are absent
  // (NaN) when fewer than two replicates succeeded.
  Scalar mean_mse = 0, se_mse = 0;
  Scalar mean_rise = 0, se_rise = 0;
  Scalar mean_r1 = 0, se_r1 = 0;
  Scalar mean_r2 = 0, se_r2 = 0;
};

/// Repeated-replicate study: for each replicate, draws a fresh training set
/// and an independent test set, runs the estimator, and scores prediction MSE
/// plus the surface recovery metrics against the scenario truth.
template <class Scalar>
ReplicateReport<Scalar> run_replicated(const SimScenario<Scalar>& scenario,
                                       const EstimatorFn<Scalar>& estimator, Index n_reps,
                                       Index test_size = 10000, Scalar zero_threshold = Scalar(1e-8)) {
  scenario.validate();
  if (n_reps < 1) throw std::invalid_argument("run_replicated: need at least one replicate");
  ReplicateReport<Scalar> report;
  const Scalar sigma = calibrate_noise(scenario);
  report.sigma = sigma;
  const VectorX<Scalar> truth = scenario.truth_on_grid();
  const VectorX<Scalar> weights = quadrature_weights(scenario.grid);

  for (Index rep = 0; rep < n_reps; ++rep) {
    ReplicateRow<Scalar> row;
    row.replicate = rep;
    try {
      SimScenario<Scalar> local = scenario;
      local.seed = derive_seed(scenario.seed, 1 + 2 * static_cast<std::uint64_t>(rep));
      const SimDataset<Scalar> train = generate_dataset(local, sigma);
      SimScenario<Scalar> test_scn = scenario;
      test_scn.seed = derive_seed(scenario.seed, 2 + 2 * static_cast<std::uint64_t>(rep));
      test_scn.n = test_size;
      const SimDataset<Scalar> test = generate_dataset(test_scn, sigma);

      const GdsFit<Scalar> f = estimator(TrainData<Scalar>{train, scenario.grid, weights});

      const BasisMatrix<Scalar> bt_test = basis_matrix(f.config.basis, scenario.grid);
      const VectorX<Scalar> y_hat = predict(f, test.images, bt_test, weights);
      row.mse = mse<Scalar>(y_hat, test.y);

      const SurfaceValues<Scalar> surf = evaluate_surface(f, scenario.grid);
      SurfacePair<Scalar> pair{truth, surf.truncated, weights};
      row.rise = rise(pair);
      row.r1 = zero_recovery_r1(pair, zero_threshold);
      row.r2 = nonzero_recovery_r2(pair, zero_threshold);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      ++report.failures;
    }
    report.rows.push_back(std::move(row));
  }

  auto aggregate = [&](auto getter, Scalar& mean_out, Scalar& se_out) {
    Scalar sum = 0;
    Index count = 0;
    for (const auto& row : report.rows)
      if (row.ok) {
        sum += getter(row);
        ++count;
      }
    if (count == 0) {
      mean_out = se_out = std::numeric_limits<Scalar>::quiet_NaN();
      return;
    }
    mean_out = sum / Scalar(count);
    if (count < 2) {
      se_out = std::numeric_limits<Scalar>::quiet_NaN();
      return;
    }
    Scalar ss = 0;
    for (const auto& row : report.rows)
      if (row.ok) ss += (getter(row) - mean_out) * (getter(row) - mean_out);
    se_out = std::sqrt(ss / Scalar(count - 1) / Scalar(count));
  };
  aggregate([](const auto& r) { return r.mse; }, report.mean_mse, report.se_mse);
  aggregate([](const auto& r) { return r.rise; }, report.mean_rise, report.se_rise);
  aggregate([](const auto& r) { return r.r1; }, report.mean_r1, report.se_r1);
  aggregate([](const auto& r) { return r.r2; }, report.mean_r2, report.se_r2);
  return report;
}

}  // namespace gds
