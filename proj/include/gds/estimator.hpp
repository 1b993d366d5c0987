#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "gds/bases.hpp"
#include "gds/design.hpp"
#include "gds/diffops.hpp"
#include "gds/lp.hpp"
#include "gds/simplex.hpp"

namespace gds {

template <class Scalar>
struct GdsConfig {
  BasisSpec<Scalar> basis;
  GridSpec<Scalar> grid;
  TransformVariant variant = TransformVariant::Separable;
  int d1 = 1;
  int d2 = 1;
  Scalar w = 1;
  Scalar lambda = 0;
  Scalar zero_threshold = Scalar(1e-8);

  void validate() const {
    if (lambda <= Scalar(0)) throw std::invalid_argument("GdsConfig: lambda must be positive");
    if (w < Scalar(0)) throw std::invalid_argument("GdsConfig: w must be nonnegative");
    if (zero_threshold <= Scalar(0)) throw std::invalid_argument("GdsConfig: zero_threshold must be positive");
  }
};

template <class Scalar>
struct FitDiagnostics {
  Scalar objective = 0;
  Scalar primal_residual = 0;
  std::vector<Index> dropped_columns;
  Scalar d_max = 0;
  Scalar sigma_min = 0;
};

template <class Scalar>
struct GdsFit {
  VectorX<Scalar> eta_hat;
  Scalar alpha_hat = 0;
  VectorX<Scalar> gamma_hat;       // A eta_hat
  std::vector<Index> active_set;   // |eta_hat_j| above the zero threshold
  GdsConfig<Scalar> config;
  FitDiagnostics<Scalar> diagnostics;
};

class SolveError : public std::runtime_error {
 public:
  SolveError(LpStatus status, const std::string& what) : std::runtime_error(what), status_(status) {}
  LpStatus status() const { return status_; }

 private:
  LpStatus status_;
};

namespace detail {

template <class Scalar>
GdsFit<Scalar> finish_fit(const DesignSet<Scalar>& ds, const GdsConfig<Scalar>& cfg,
                          const TransformA<Scalar>& a, const LpSolution<Scalar>& sol,
                          const VarLayout& layout) {
  GdsFit<Scalar> fit;
  fit.config = cfg;
  fit.eta_hat = sol.z.segment(layout.eta_plus(), layout.p) - sol.z.segment(layout.eta_minus(), layout.p);
  fit.alpha_hat = ds.y_mean - ds.x_means.dot(fit.eta_hat);
  fit.gamma_hat = a.values * fit.eta_hat;
  for (Index j = 0; j < fit.eta_hat.size(); ++j)
    if (std::abs(fit.eta_hat[j]) > cfg.zero_threshold) fit.active_set.push_back(j);
  fit.diagnostics.objective = sol.objective;
  fit.diagnostics.primal_residual = sol.primal_residual;
  fit.diagnostics.dropped_columns = ds.dropped_columns;
  fit.diagnostics.d_max = ds.d_max();
  fit.diagnostics.sigma_min = a.sigma_min;
  return fit;
}

}  // namespace detail

/// Fits the estimator: assembles the transform, solves the split-variable
/// linear program on centered data, and recovers the intercept from the
/// stored means. Solver failure statuses are reported, never silently fixed.
template <class Scalar>
GdsFit<Scalar> fit(const DesignSet<Scalar>& ds, const GdsConfig<Scalar>& cfg,
                   const SolverOptions<Scalar>& opts = {}) {
  cfg.validate();
  const BasisMatrix<Scalar> bt = basis_matrix(cfg.basis, cfg.grid);
  const TransformA<Scalar> a = assemble_transform(cfg.variant, cfg.w, cfg.d1, cfg.d2, cfg.grid, bt);
  const LinearProgram<Scalar> lp = build_gds_lp(ds, a, cfg.lambda);
  const LpSolution<Scalar> sol = solve_lp(lp, opts);
  if (sol.status != LpStatus::Optimal)
    throw SolveError(sol.status, std::string("fit: linear program terminated with status ") +
                                     to_string(sol.status));
  return detail::finish_fit(ds, cfg, a, sol, lp.layout);
}

/// Predicted responses alpha_hat + X eta_hat for images on the fit grid,
/// with X built from uncentered images by quadrature.
template <class Scalar>
VectorX<Scalar> predict(const GdsFit<Scalar>& fit, const std::vector<ImageSample<Scalar>>& images,
                        const BasisMatrix<Scalar>& bt, const VectorX<Scalar>& weights) {
  if (bt.grid.m1 != fit.config.grid.m1 || bt.grid.m2 != fit.config.grid.m2)
    throw std::invalid_argument("predict: images must live on the fit grid");
  const MatrixX<Scalar> x = design_matrix(images, bt, weights);
  return (x * fit.eta_hat).array() + fit.alpha_hat;
}

template <class Scalar>
VectorX<Scalar> predict(const GdsFit<Scalar>& fit, const MatrixX<Scalar>& design) {
  return (design * fit.eta_hat).array() + fit.alpha_hat;
}

/// Coefficient surface values over an evaluation grid. The truncated channel
/// reports values below the zero threshold as exact zeros.
template <class Scalar>
struct SurfaceValues {
  VectorX<Scalar> raw;
  VectorX<Scalar> truncated;
};

template <class Scalar>
SurfaceValues<Scalar> evaluate_surface(const GdsFit<Scalar>& fit, const GridSpec<Scalar>& eval_grid) {
  const BasisMatrix<Scalar> bt = basis_matrix(fit.config.basis, eval_grid);
  SurfaceValues<Scalar> sv;
  sv.raw = bt.values * fit.eta_hat;
  sv.truncated = sv.raw;
  for (Index j = 0; j < sv.truncated.size(); ++j)
    if (std::abs(sv.truncated[j]) < fit.config.zero_threshold) sv.truncated[j] = Scalar(0);
  return sv;
}

/// Second-stage fit that removes shrinkage bias: the sparsity weight is set
/// to zero in the transform and the surface is pinned to zero, via equality
/// rows on the basis evaluations, at every grid point where the truncated
/// first-stage surface vanished.
template <class Scalar>
GdsFit<Scalar> refit(const GdsFit<Scalar>& first, const DesignSet<Scalar>& ds, Scalar lambda2,
                     const SolverOptions<Scalar>& opts = {}) {
  GdsConfig<Scalar> cfg = first.config;
  cfg.lambda = lambda2;
  cfg.w = Scalar(0);
  cfg.validate();

  const BasisMatrix<Scalar> bt = basis_matrix(cfg.basis, cfg.grid);
  const TransformA<Scalar> a = assemble_transform(cfg.variant, cfg.w, cfg.d1, cfg.d2, cfg.grid, bt);
  const SurfaceValues<Scalar> surf = evaluate_surface(first, cfg.grid);
  std::vector<Index> zero_points;
  for (Index g = 0; g < surf.truncated.size(); ++g)
    if (surf.truncated[g] == Scalar(0)) zero_points.push_back(g);

  LinearProgram<Scalar> lp = build_gds_lp(ds, a, cfg.lambda);
  const Index extra = static_cast<Index>(zero_points.size());
  if (extra > 0) {
    const Index base = lp.aeq.rows();
    lp.aeq.conservativeResize(base + extra, Eigen::NoChange);
    lp.beq.conservativeResize(base + extra);
    lp.aeq.bottomRows(extra).setZero();
    for (Index r = 0; r < extra; ++r) {
      const Index g = zero_points[static_cast<size_t>(r)];
      lp.aeq.row(base + r).segment(lp.layout.eta_plus(), lp.layout.p) = bt.values.row(g);
      lp.aeq.row(base + r).segment(lp.layout.eta_minus(), lp.layout.p) = -bt.values.row(g);
      lp.beq[base + r] = Scalar(0);
    }
  }
  const LpSolution<Scalar> sol = solve_lp(lp, opts);
  if (sol.status != LpStatus::Optimal) {
    std::string what = std::string("refit: linear program terminated with status ") + to_string(sol.status);
    if (sol.status == LpStatus::Infeasible)
      what += " (surface zero-set equality block over " + std::to_string(zero_points.size()) +
              " grid points is over-constrained)";
    throw SolveError(sol.status, what);
  }
  return detail::finish_fit(ds, cfg, a, sol, lp.layout);
}

}  // namespace gds
