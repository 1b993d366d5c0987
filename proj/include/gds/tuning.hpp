#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gds/estimator.hpp"
#include "gds/metrics.hpp"

namespace gds {

enum class TuneCriterion { ValMse, Aic, Bic, Cv };

inline const char* to_string(TuneCriterion c) {
  switch (c) {
    case TuneCriterion::ValMse: return "val_mse";
    case TuneCriterion::Aic: return "aic";
    case TuneCriterion::Bic: return "bic";
    case TuneCriterion::Cv: return "cv";
  }
  return "unknown";
}

/// Candidate lambdas proportional to sqrt(log p / n): multipliers are
/// log-spaced in [c_min, c_max] and the result is sorted descending.
template <class Scalar>
VectorX<Scalar> lambda_grid(Index n, Index p, Index count, Scalar c_min, Scalar c_max) {
  if (p < 2) throw std::invalid_argument("lambda_grid: p must be at least 2");
  if (n < 1) throw std::invalid_argument("lambda_grid: n must be positive");
  if (count < 1) throw std::invalid_argument("lambda_grid: count must be positive");
  if (c_min <= Scalar(0) || c_min > c_max)
    throw std::invalid_argument("lambda_grid: require 0 < c_min <= c_max");
  const Scalar rate = std::sqrt(std::log(Scalar(p)) / Scalar(n));
  VectorX<Scalar> out(count);
  if (count == 1) {
    out[0] = c_min * rate;
    return out;
  }
  const Scalar la = std::log(c_min), lb = std::log(c_max);
  for (Index i = 0; i < count; ++i)
    out[i] = std::exp(lb + (la - lb) * Scalar(i) / Scalar(count - 1)) * rate;
  return out;
}

/// Candidate grid over (lambda, w, difference orders); lambdas must be
/// strictly positive and sorted descending.
template <class Scalar>
struct TuneGrid {
  VectorX<Scalar> lambdas;
  std::vector<Scalar> ws;                 // empty: keep the base config's w
  std::vector<std::pair<int, int>> orders;  // empty: keep the base config's orders

  void validate() const {
    if (lambdas.size() == 0) throw std::invalid_argument("TuneGrid: at least one lambda is required");
    for (Index i = 0; i < lambdas.size(); ++i) {
      if (lambdas[i] <= Scalar(0)) throw std::invalid_argument("TuneGrid: lambdas must be positive");
      if (i > 0 && lambdas[i] >= lambdas[i - 1])
        throw std::invalid_argument("TuneGrid: lambdas must be sorted strictly descending");
    }
  }

  /// Candidates in selection order: lambda descending outermost, so that
  /// score ties resolve toward the larger lambda.
  std::vector<GdsConfig<Scalar>> expand(const GdsConfig<Scalar>& base) const {
    validate();
    std::vector<GdsConfig<Scalar>> out;
    const std::vector<Scalar> w_list = ws.empty() ? std::vector<Scalar>{base.w} : ws;
    const std::vector<std::pair<int, int>> o_list =
        orders.empty() ? std::vector<std::pair<int, int>>{{base.d1, base.d2}} : orders;
    for (Index i = 0; i < lambdas.size(); ++i)
      for (const Scalar w : w_list)
        for (const auto& [d1, d2] : o_list) {
          GdsConfig<Scalar> cfg = base;
          cfg.lambda = lambdas[i];
          cfg.w = w;
          cfg.d1 = d1;
          cfg.d2 = d2;
          out.push_back(cfg);
        }
    return out;
  }
};

template <class Scalar>
struct ScoredConfig {
  GdsConfig<Scalar> config;
  Scalar score = 0;
};

template <class Scalar>
struct TuneResult {
  GdsConfig<Scalar> best_config;
  std::vector<ScoredConfig<Scalar>> scores;
  TuneCriterion criterion = TuneCriterion::ValMse;
  bool zero_rss_warning = false;  // AIC hit a perfect fit and was clamped
};

namespace detail {

template <class Scalar>
std::string describe(const GdsConfig<Scalar>& cfg) {
  std::ostringstream os;
  os << "(lambda=" << cfg.lambda << ", w=" << cfg.w << ", d1=" << cfg.d1 << ", d2=" << cfg.d2 << ")";
  return os.str();
}

template <class Scalar, class ScoreFn>
TuneResult<Scalar> select_by(const std::vector<GdsConfig<Scalar>>& candidates, TuneCriterion crit,
                             ScoreFn&& score_fn) {
  TuneResult<Scalar> result;
  result.criterion = crit;
  bool have_best = false;
  Scalar best = 0;
  for (const auto& cfg : candidates) {
    Scalar s;
    try {
      s = score_fn(cfg, result);
    } catch (const SolveError& e) {
      throw SolveError(e.status(), std::string(e.what()) + " at config " + describe(cfg));
    }
    result.scores.push_back({cfg, s});
    if (!have_best || s < best) {  // strict: earlier (larger-lambda) candidates win ties
      best = s;
      result.best_config = cfg;
      have_best = true;
    }
  }
  return result;
}

}  // namespace detail

/// Scores every candidate by mean squared prediction error on a held-out
/// validation set and returns the minimizer.
template <class Scalar>
TuneResult<Scalar> select_validation(const DesignSet<Scalar>& train, const DesignSet<Scalar>& val,
                                     const TuneGrid<Scalar>& grid, const GdsConfig<Scalar>& base,
                                     const SolverOptions<Scalar>& opts = {}) {
  return detail::select_by<Scalar>(
      grid.expand(base), TuneCriterion::ValMse, [&](const GdsConfig<Scalar>& cfg, TuneResult<Scalar>&) {
        const GdsFit<Scalar> f = fit(train, cfg, opts);
        return mse<Scalar>(predict(f, val.x), val.y);
      });
}

/// Information-criterion selection on training residuals with degrees of
/// freedom equal to the active-set size. Requires a piecewise basis whose
/// partition is aligned with the estimation grid (one grid point per piece),
/// the setting under which that df definition applies.
template <class Scalar>
TuneResult<Scalar> select_aic(const DesignSet<Scalar>& train, const TuneGrid<Scalar>& grid,
                              const GdsConfig<Scalar>& base, bool bic = false,
                              const SolverOptions<Scalar>& opts = {}) {
  if (base.basis.kind != BasisKind::Piecewise || base.basis.p1 != base.grid.m1 ||
      base.basis.p2 != base.grid.m2)
    throw std::invalid_argument(
        "select_aic: requires a piecewise basis aligned with the estimation grid "
        "(one grid point per piece) for the active-set df definition");
  const Scalar n = Scalar(train.n());
  const Scalar penalty = bic ? std::log(n) : Scalar(2);
  return detail::select_by<Scalar>(
      grid.expand(base), bic ? TuneCriterion::Bic : TuneCriterion::Aic,
      [&](const GdsConfig<Scalar>& cfg, TuneResult<Scalar>& result) {
        const GdsFit<Scalar> f = fit(train, cfg, opts);
        const Scalar rss = (train.yc - train.xc * f.eta_hat).squaredNorm();
        const Scalar df = Scalar(f.active_set.size());
        if (rss <= Scalar(0)) {
          result.zero_rss_warning = true;
          return Scalar(-1e300) + penalty * df;
        }
        return n * std::log(rss / n) + penalty * df;
      });
}

/// Deterministic seeded k-fold assignment: a seeded shuffle of the sample
/// indices dealt round-robin into k folds.
inline std::vector<std::vector<Index>> kfold_assignment(Index n, Index k, std::uint64_t seed) {
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Index>> folds(static_cast<size_t>(k));
  for (Index i = 0; i < n; ++i) folds[static_cast<size_t>(i % k)].push_back(order[static_cast<size_t>(i)]);
  return folds;
}

/// k-fold cross-validation: mean held-out MSE across folds, refitting (and
/// recentering) on each fold's training rows.
template <class Scalar>
TuneResult<Scalar> kfold_cv(const MatrixX<Scalar>& x, const VectorX<Scalar>& y, Index k,
                            const TuneGrid<Scalar>& grid, std::uint64_t seed,
                            const GdsConfig<Scalar>& base, const SolverOptions<Scalar>& opts = {}) {
  const Index n = x.rows();
  if (k < 2) throw std::invalid_argument("kfold_cv: k must be at least 2");
  if (n < k) throw std::invalid_argument("kfold_cv: need at least k samples");
  const auto folds = kfold_assignment(n, k, seed);
  for (const auto& fold : folds)
    if (n - static_cast<Index>(fold.size()) < 2)
      throw std::invalid_argument("kfold_cv: a training fold has fewer than 2 samples");

  struct FoldData {
    DesignSet<Scalar> train;
    MatrixX<Scalar> x_test;
    VectorX<Scalar> y_test;
  };
  std::vector<FoldData> prepared;
  prepared.reserve(folds.size());
  for (const auto& fold : folds) {
    std::vector<char> held(static_cast<size_t>(n), 0);
    for (Index i : fold) held[static_cast<size_t>(i)] = 1;
    const Index n_train = n - static_cast<Index>(fold.size());
    FoldData fd;
    MatrixX<Scalar> xtr(n_train, x.cols());
    VectorX<Scalar> ytr(n_train);
    fd.x_test.resize(static_cast<Index>(fold.size()), x.cols());
    fd.y_test.resize(static_cast<Index>(fold.size()));
    Index a = 0, b = 0;
    for (Index i = 0; i < n; ++i) {
      if (held[static_cast<size_t>(i)]) {
        fd.x_test.row(b) = x.row(i);
        fd.y_test[b++] = y[i];
      } else {
        xtr.row(a) = x.row(i);
        ytr[a++] = y[i];
      }
    }
    fd.train = center(xtr, ytr);
    prepared.push_back(std::move(fd));
  }

  return detail::select_by<Scalar>(
      grid.expand(base), TuneCriterion::Cv, [&](const GdsConfig<Scalar>& cfg, TuneResult<Scalar>&) {
        Scalar total = 0;
        for (const auto& fd : prepared) {
          const GdsFit<Scalar> f = fit(fd.train, cfg, opts);
          total += mse<Scalar>(predict(f, fd.x_test), fd.y_test);
        }
        return total / Scalar(prepared.size());
      });
}

}  // namespace gds
