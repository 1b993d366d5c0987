#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "gds/bases.hpp"
#include "gds/design.hpp"
#include "gds/diffops.hpp"
#include "gds/simulate.hpp"

namespace gds {

/// Computable ingredients of the estimation and prediction error bounds.
template <class Scalar>
struct BoundConstants {
  Index l = 0;
  Index p = 0;
  Index s_hat = 0;             // sparsity of A eta* when a truth is supplied
  Scalar sigma_min_a = 0;
  Scalar d_max = 0;
  Scalar c_b = 0;
  Scalar omega_b = 0;
  bool omega_b_known = false;  // false: no truth supplied, omega_b reported as 0
  Scalar m_bound = 0;          // max quadrature L2 norm of the images
  Scalar lambda_theoretical = 0;
  Scalar c = 0;
  Scalar prob_bound = 0;       // 1 - p^(1 - c^2/2)
  Scalar sqrt_l_over_sigma_min = 0;
};

template <class Scalar>
BoundConstants<Scalar> bound_constants(const DesignSet<Scalar>& ds, const TransformA<Scalar>& a,
                                       const BasisSpec<Scalar>& basis,
                                       const std::vector<ImageSample<Scalar>>& images,
                                       const std::function<Scalar(Scalar, Scalar)>* beta_truth,
                                       Scalar c, Scalar sigma, Scalar sparsity_tol = Scalar(1e-8)) {
  if (c <= std::sqrt(Scalar(2))) throw std::invalid_argument("bound_constants: require C > sqrt(2)");
  if (ds.quad_weights.size() != a.grid.size())
    throw std::invalid_argument("bound_constants: design must carry quadrature weights for the grid");
  BoundConstants<Scalar> out;
  out.l = a.rows;
  out.p = basis.dimension();
  out.sigma_min_a = a.sigma_min;
  out.d_max = ds.d_max();
  out.c_b = basis_l2_norms(basis).c_b;
  out.c = c;
  out.m_bound = 0;
  for (const auto& img : images) {
    const Scalar n2 = img.values.cwiseProduct(img.values).dot(ds.quad_weights);
    out.m_bound = std::max(out.m_bound, std::sqrt(n2));
  }
  if (beta_truth != nullptr) {
    const SurfaceProjection<Scalar> proj =
        project_beta<Scalar>(*beta_truth, basis, a.grid, ds.quad_weights);
    out.omega_b = proj.omega_b;
    out.omega_b_known = true;
    const VectorX<Scalar> gamma_star = a.values * proj.eta_star;
    for (Index j = 0; j < gamma_star.size(); ++j)
      if (std::abs(gamma_star[j]) > sparsity_tol) ++out.s_hat;
  }
  out.lambda_theoretical =
      c * sigma * std::sqrt(std::log(Scalar(out.p)) / Scalar(ds.n())) + out.m_bound * out.omega_b;
  out.prob_bound = Scalar(1) - std::pow(Scalar(out.p), Scalar(1) - c * c / Scalar(2));
  out.sqrt_l_over_sigma_min =
      a.sigma_min > Scalar(0) ? std::sqrt(Scalar(a.rows)) / a.sigma_min
                              : std::numeric_limits<Scalar>::infinity();
  return out;
}

enum class KappaKind { Kappa1, Kappa2 };

template <class Scalar>
struct KappaEstimate {
  KappaKind which = KappaKind::Kappa1;
  Index s = 1;
  Index s_prime = 0;
  Scalar value = 0;
  Index trials = 0;
  std::uint64_t seed = 0;
};

/// Draw policy for the cone Monte-Carlo. The default draws a fresh random
/// support each trial and scales the off-support block to a uniform fraction
/// of the l1 budget; boundary draws pin the fraction at one, and a fixed
/// support restricts the search to the given coordinates.
template <class Scalar>
struct KappaOptions {
  std::vector<Index> support;  // empty: uniformly random support per trial
  bool boundary = false;       // true: off-support l1 mass equals the budget exactly
};

/// Ratio ||V h||_2 / (sqrt(n) ||h_restricted||_2) for one cone vector, where
/// the restriction is the support itself (kappa1) or the support plus the
/// s_prime largest off-support entries (kappa2).
template <class Scalar>
Scalar cone_ratio(const MatrixX<Scalar>& v, const VectorX<Scalar>& h, const std::vector<Index>& support,
                  KappaKind which, Index s_prime) {
  Scalar denom2 = 0;
  for (Index j : support) denom2 += h[j] * h[j];
  if (which == KappaKind::Kappa2) {
    std::vector<char> in_support(static_cast<size_t>(h.size()), 0);
    for (Index j : support) in_support[static_cast<size_t>(j)] = 1;
    std::vector<Index> outside;
    for (Index j = 0; j < h.size(); ++j)
      if (!in_support[static_cast<size_t>(j)]) outside.push_back(j);
    std::stable_sort(outside.begin(), outside.end(),
                     [&](Index a, Index b) { return std::abs(h[a]) > std::abs(h[b]); });
    for (Index r = 0; r < std::min<Index>(s_prime, static_cast<Index>(outside.size())); ++r)
      denom2 += h[outside[static_cast<size_t>(r)]] * h[outside[static_cast<size_t>(r)]];
  }
  const Scalar denom = std::sqrt(Scalar(v.rows())) * std::sqrt(denom2);
  if (denom == Scalar(0)) throw std::invalid_argument("cone_ratio: restricted block of h is zero");
  return (v * h).norm() / denom;
}

/// Monte-Carlo lower envelope of the restricted eigenvalues: the minimum cone
/// ratio over random draws h with off-support l1 mass at most the on-support
/// l1 mass. The minimum over finitely many draws is an upper estimate of the
/// true constant; trials and seed are reported alongside the value.
template <class Scalar>
KappaEstimate<Scalar> estimate_kappa(const MatrixX<Scalar>& v, KappaKind which, Index s, Index s_prime,
                                     Index trials, std::uint64_t seed,
                                     const KappaOptions<Scalar>& opts = {}) {
  const Index l = v.cols();
  if (s < 1 || s > l) throw std::invalid_argument("estimate_kappa: require 1 <= S <= L");
  if (which == KappaKind::Kappa2 && (s_prime < 1 || s + s_prime > l))
    throw std::invalid_argument("estimate_kappa: require 1 <= S' and S + S' <= L");
  if (trials < 1) throw std::invalid_argument("estimate_kappa: need at least one trial");
  if (!opts.support.empty() && static_cast<Index>(opts.support.size()) != s)
    throw std::invalid_argument("estimate_kappa: fixed support size must equal S");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  KappaEstimate<Scalar> est;
  est.which = which;
  est.s = s;
  est.s_prime = which == KappaKind::Kappa2 ? s_prime : 0;
  est.trials = trials;
  est.seed = seed;
  est.value = std::numeric_limits<Scalar>::infinity();

  std::vector<Index> all(static_cast<size_t>(l));
  for (Index j = 0; j < l; ++j) all[static_cast<size_t>(j)] = j;
  VectorX<Scalar> h(l);

  for (Index trial = 0; trial < trials; ++trial) {
    std::vector<Index> support = opts.support;
    if (support.empty()) {  // partial Fisher-Yates for an S-subset
      std::vector<Index> pool = all;
      support.resize(static_cast<size_t>(s));
      for (Index r = 0; r < s; ++r) {
        std::uniform_int_distribution<Index> pick(r, l - 1);
        std::swap(pool[static_cast<size_t>(r)], pool[static_cast<size_t>(pick(rng))]);
        support[static_cast<size_t>(r)] = pool[static_cast<size_t>(r)];
      }
      std::sort(support.begin(), support.end());
    }

    Scalar budget = 0;
    bool degenerate = true;
    while (degenerate) {  // all-zero on-support draws are rejected and redrawn
      budget = 0;
      for (Index j : support) {
        h[j] = Scalar(normal(rng));
        budget += std::abs(h[j]);
      }
      degenerate = budget == Scalar(0);
    }
    if (!opts.boundary) budget *= Scalar(unif(rng));

    std::vector<char> in_support(static_cast<size_t>(l), 0);
    for (Index j : support) in_support[static_cast<size_t>(j)] = 1;
    Scalar off_l1 = 0;
    for (Index j = 0; j < l; ++j) {
      if (in_support[static_cast<size_t>(j)]) continue;
      h[j] = Scalar(normal(rng));
      off_l1 += std::abs(h[j]);
    }
    if (off_l1 > Scalar(0)) {
      const Scalar scale = budget / off_l1;
      for (Index j = 0; j < l; ++j)
        if (!in_support[static_cast<size_t>(j)]) h[j] *= scale;
    }

    est.value = std::min(est.value, cone_ratio(v, h, support, which, s_prime));
  }
  return est;
}

/// The small reference design bundled for the kappa reproduction check:
/// a 2x2 grid with the identity basis matrix, first-order differences in both
/// directions, unit weight, and a fixed 4x4 standard normal design.
template <class Scalar>
struct ReferenceDesign {
  MatrixX<Scalar> x;        // 4 x 4
  MatrixX<Scalar> a;        // 5 x 4
  MatrixX<Scalar> v;        // x * pinv(a)
};

template <class Scalar>
ReferenceDesign<Scalar> reference_design_supp92() {
  ReferenceDesign<Scalar> rd;
  rd.x.resize(4, 4);
  rd.x << Scalar(0.7533), Scalar(-2.2169), Scalar(-1.7922), Scalar(0.8647),
      Scalar(2.0144), Scalar(0.7584), Scalar(-0.0420), Scalar(-1.7202),
      Scalar(-0.3551), Scalar(-1.3062), Scalar(2.1500), Scalar(0.1341),
      Scalar(2.0282), Scalar(-0.8025), Scalar(-1.7702), Scalar(-0.0758);
  GridSpec<Scalar> grid;
  grid.m1 = grid.m2 = 2;
  grid.t0 = grid.s0 = Scalar(0);
  grid.delta1 = grid.delta2 = Scalar(1);
  const BasisMatrix<Scalar> bt = basis_matrix(BasisSpec<Scalar>::piecewise(2, 2), grid);
  const TransformA<Scalar> a = assemble_transform(TransformVariant::Joint, Scalar(1), 1, 1, grid, bt);
  rd.a = a.values;
  rd.v = rd.x * pseudoinverse(a);
  return rd;
}

/// Empirical check of the residual-correlation bound: the fraction of
/// replicates on which the true coefficient vector satisfies the constraint
/// at lambda = C sigma sqrt(log p / n), for a surface exactly representable
/// in the chosen piecewise basis (zero approximation error).
template <class Scalar>
Scalar feasibility_probe(const SimScenario<Scalar>& scenario, const BasisSpec<Scalar>& basis,
                         Scalar c, Index reps, std::uint64_t seed,
                         std::optional<Scalar> sigma_override = std::nullopt) {
  scenario.validate();
  const BasisMatrix<Scalar> bt = basis_matrix(basis, scenario.grid);
  const VectorX<Scalar> weights = quadrature_weights(scenario.grid);
  const SurfaceProjection<Scalar> proj = project_beta<Scalar>(
      [&](Scalar t, Scalar s) { return beta_eval(scenario.beta, t, s); }, basis, scenario.grid, weights);
  if (proj.omega_b > Scalar(1e-8))
    throw std::invalid_argument("feasibility_probe: surface is not exactly representable in the basis");
  const Scalar sigma =
      sigma_override.has_value() ? *sigma_override : calibrate_noise(scenario);
  const Scalar lambda =
      c * sigma * std::sqrt(std::log(Scalar(basis.dimension())) / Scalar(scenario.n));

  Index satisfied = 0;
  for (Index rep = 0; rep < reps; ++rep) {
    SimScenario<Scalar> local = scenario;
    local.seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
    const SimDataset<Scalar> data = generate_dataset(local, sigma);
    const MatrixX<Scalar> x = design_matrix(data.images, bt, weights);
    const DesignSet<Scalar> ds = center(x, data.y);
    const VectorX<Scalar> resid = ds.yc - ds.xc * proj.eta_star;
    Scalar corr = 0;
    for (Index j = 0; j < ds.p(); ++j) {
      if (ds.d[j] <= Scalar(0)) continue;
      corr = std::max(corr, std::abs(ds.xc.col(j).dot(resid)) / (Scalar(ds.n()) * ds.d[j]));
    }
    if (corr <= lambda) ++satisfied;
  }
  return Scalar(satisfied) / Scalar(reps);
}

}  // namespace gds
