#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "gds/bsplines.hpp"
#include "gds/grid.hpp"

namespace gds {

enum class BasisKind { Bspline, Piecewise };

/// Tensor-product basis on [0,1]^2. Both families index the tensor basis as
/// j = k*p2 + l (t-factor k, s-factor l, zero-based), matching the row-major
/// grid ordering.
template <class Scalar>
struct BasisSpec {
  BasisKind kind = BasisKind::Piecewise;

  // bspline: polynomial degrees and evenly spaced interior knot counts;
  // the per-dimension basis size is order + 1 + interior knots.
  int order1 = 0;
  int order2 = 0;
  Index interior_knots1 = 0;
  Index interior_knots2 = 0;

  // piecewise: piece counts of the even partition of [0,1] per dimension.
  Index p1 = 0;
  Index p2 = 0;

  static BasisSpec bspline(int order1, int order2, Index knots1, Index knots2) {
    if (order1 < 0 || order2 < 0) throw std::invalid_argument("BasisSpec: spline order must be nonnegative");
    if (knots1 < 0 || knots2 < 0) throw std::invalid_argument("BasisSpec: interior knot count must be nonnegative");
    BasisSpec s;
    s.kind = BasisKind::Bspline;
    s.order1 = order1;
    s.order2 = order2;
    s.interior_knots1 = knots1;
    s.interior_knots2 = knots2;
    s.p1 = order1 + 1 + knots1;
    s.p2 = order2 + 1 + knots2;
    return s;
  }

  static BasisSpec bspline(int order, Index knots) { return bspline(order, order, knots, knots); }

  static BasisSpec piecewise(Index p1, Index p2) {
    if (p1 < 1 || p2 < 1) throw std::invalid_argument("BasisSpec: piece counts must be positive");
    BasisSpec s;
    s.kind = BasisKind::Piecewise;
    s.p1 = p1;
    s.p2 = p2;
    return s;
  }

  Index dimension() const { return p1 * p2; }
};

namespace detail {

/// Index of the half-open piece [k/p, (k+1)/p) containing t; the last piece
/// is closed at 1.
inline Index piece_index(double t, Index pieces) {
  if (t >= 1.0) return pieces - 1;
  Index k = static_cast<Index>(t * static_cast<double>(pieces));
  if (k >= pieces) k = pieces - 1;
  // Guard against rounding t*p up across a breakpoint boundary.
  while (k > 0 && t < static_cast<double>(k) / static_cast<double>(pieces)) --k;
  while (k + 1 < pieces && t >= static_cast<double>(k + 1) / static_cast<double>(pieces)) ++k;
  return k;
}

template <class Scalar>
VectorX<Scalar> univariate_values(const BasisSpec<Scalar>& spec, int dim, Scalar x) {
  if (spec.kind == BasisKind::Bspline) {
    const BsplineFamily<Scalar> fam(dim == 1 ? spec.order1 : spec.order2,
                                    dim == 1 ? spec.interior_knots1 : spec.interior_knots2);
    return fam.eval(x);
  }
  const Index pieces = dim == 1 ? spec.p1 : spec.p2;
  VectorX<Scalar> v = VectorX<Scalar>::Zero(pieces);
  v[piece_index(static_cast<double>(x), pieces)] = Scalar(1);
  return v;
}

}  // namespace detail

/// All p basis functions evaluated at (t,s), ordered j = k*p2 + l.
template <class Scalar>
VectorX<Scalar> eval_basis(const BasisSpec<Scalar>& spec, Scalar t, Scalar s) {
  if (t < Scalar(0) || t > Scalar(1) || s < Scalar(0) || s > Scalar(1))
    throw std::domain_error("eval_basis: coordinates outside [0,1]^2");
  const VectorX<Scalar> ft = detail::univariate_values(spec, 1, t);
  const VectorX<Scalar> fs = detail::univariate_values(spec, 2, s);
  VectorX<Scalar> out(ft.size() * fs.size());
  for (Index k = 0; k < ft.size(); ++k) out.segment(k * fs.size(), fs.size()) = ft[k] * fs;
  return out;
}

/// Basis functions evaluated over a grid: row i holds eval_basis at grid
/// point i, stacked in the grid's row-major order.
template <class Scalar>
struct BasisMatrix {
  MatrixX<Scalar> values;  // (m1*m2) x p
  GridSpec<Scalar> grid;
  BasisSpec<Scalar> spec;
};

template <class Scalar>
BasisMatrix<Scalar> basis_matrix(const BasisSpec<Scalar>& spec, const GridSpec<Scalar>& grid) {
  grid.validate();
  BasisMatrix<Scalar> bm;
  bm.grid = grid;
  bm.spec = spec;
  bm.values.resize(grid.size(), spec.dimension());
  for (Index j = 0; j < grid.size(); ++j) {
    const auto [t, s] = grid.point(j);
    bm.values.row(j) = eval_basis(spec, t, s).transpose();
  }
  return bm;
}

/// Squared L2 norms of the basis functions and their root-sum.
template <class Scalar>
struct BasisNorms {
  VectorX<Scalar> squared_integrals;  // entry j: integral of b_j^2 over [0,1]^2
  Scalar c_b = 0;                     // sqrt of the sum
};

template <class Scalar>
BasisNorms<Scalar> basis_l2_norms(const BasisSpec<Scalar>& spec) {
  VectorX<Scalar> it, is;
  if (spec.kind == BasisKind::Piecewise) {
    it = VectorX<Scalar>::Constant(spec.p1, Scalar(1) / Scalar(spec.p1));
    is = VectorX<Scalar>::Constant(spec.p2, Scalar(1) / Scalar(spec.p2));
  } else {
    it = bspline_squared_integrals(BsplineFamily<Scalar>(spec.order1, spec.interior_knots1));
    is = bspline_squared_integrals(BsplineFamily<Scalar>(spec.order2, spec.interior_knots2));
  }
  BasisNorms<Scalar> out;
  out.squared_integrals.resize(spec.dimension());
  for (Index k = 0; k < it.size(); ++k)
    out.squared_integrals.segment(k * is.size(), is.size()) = it[k] * is;
  out.c_b = std::sqrt(out.squared_integrals.sum());
  return out;
}

/// Least-squares projection of a surface onto the basis span under the
/// quadrature inner product defined by (grid, weights).
template <class Scalar>
struct SurfaceProjection {
  VectorX<Scalar> eta_star;
  Scalar omega_b = 0;          // quadrature L2 norm of the residual
  bool rank_deficient = false; // Gram matrix was singular; solved via pseudoinverse
};

template <class Scalar>
SurfaceProjection<Scalar> project_beta(const std::function<Scalar(Scalar, Scalar)>& beta,
                                       const BasisSpec<Scalar>& spec, const GridSpec<Scalar>& grid,
                                       const VectorX<Scalar>& weights) {
  grid.validate();
  if (weights.size() != grid.size())
    throw std::invalid_argument("project_beta: weight count must match the grid");
  const Index p = spec.dimension();
  MatrixX<Scalar> gram = MatrixX<Scalar>::Zero(p, p);
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(p);
  VectorX<Scalar> beta_vals(grid.size());
  MatrixX<Scalar> b(grid.size(), p);
  for (Index j = 0; j < grid.size(); ++j) {
    const auto [t, s] = grid.point(j);
    b.row(j) = eval_basis(spec, t, s).transpose();
    beta_vals[j] = beta(t, s);
    gram.noalias() += weights[j] * b.row(j).transpose() * b.row(j);
    rhs.noalias() += (weights[j] * beta_vals[j]) * b.row(j).transpose();
  }
  SurfaceProjection<Scalar> out;
  Eigen::LDLT<MatrixX<Scalar>> ldlt(gram);
  out.eta_star = ldlt.solve(rhs);
  const VectorX<Scalar> diag = ldlt.vectorD().cwiseAbs();
  const Scalar gram_scale = gram.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || diag.minCoeff() <= Scalar(1e-12) * diag.maxCoeff() ||
      (gram * out.eta_star - rhs).cwiseAbs().maxCoeff() > Scalar(1e-10) * std::max(Scalar(1), gram_scale)) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(Scalar(1e-12));
    out.eta_star = svd.solve(rhs);
    out.rank_deficient = true;
  }
  const VectorX<Scalar> resid = beta_vals - b * out.eta_star;
  out.omega_b = std::sqrt(resid.cwiseProduct(resid).dot(weights));
  return out;
}

}  // namespace gds
