#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gds/bases.hpp"
#include "gds/grid.hpp"

namespace gds {

/// One image predictor sampled on the evaluation grid, stored flat in the
/// grid's row-major order. Masked-out cells must carry value 0.
template <class Scalar>
struct ImageSample {
  std::string id;
  VectorX<Scalar> values;  // length m1*m2

  Scalar at(const GridSpec<Scalar>& grid, Index k, Index l) const { return values[k * grid.m2 + l]; }
};

/// Quadrature weights over the grid. Without a mask this is the equal-weight
/// rule summing to the unit area; with a mask, weights are proportional to
/// cell area and zero on excluded cells.
template <class Scalar>
VectorX<Scalar> quadrature_weights(const GridSpec<Scalar>& grid,
                                   const std::vector<bool>* mask = nullptr) {
  grid.validate();
  const Index n = grid.size();
  if (mask == nullptr) return VectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  if (static_cast<Index>(mask->size()) != n)
    throw std::invalid_argument("quadrature_weights: mask size must match the grid");
  VectorX<Scalar> w = VectorX<Scalar>::Zero(n);
  Index kept = 0;
  for (Index j = 0; j < n; ++j)
    if ((*mask)[j]) ++kept;
  if (kept == 0) throw std::invalid_argument("quadrature_weights: all cells are masked out");
  for (Index j = 0; j < n; ++j)
    if ((*mask)[j]) w[j] = Scalar(1) / Scalar(n);
  return w;
}

/// Design matrix with X_ij the quadrature approximation of the integral of
/// x_i * b_j over the domain.
template <class Scalar>
MatrixX<Scalar> design_matrix(const std::vector<ImageSample<Scalar>>& images,
                              const BasisMatrix<Scalar>& bt, const VectorX<Scalar>& weights) {
  if (weights.size() != bt.values.rows())
    throw std::invalid_argument("design_matrix: weight count must match the basis grid");
  MatrixX<Scalar> x(static_cast<Index>(images.size()), bt.values.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const auto& img = images[static_cast<size_t>(i)].values;
    if (img.size() != weights.size())
      throw std::invalid_argument("design_matrix: image size must match the grid");
    x.row(i).noalias() = (img.cwiseProduct(weights)).transpose() * bt.values;
  }
  return x;
}

/// Centered design: column/response means removed, diagonal column n-norms D,
/// and the indices of columns whose n-norm is numerically zero (excluded from
/// the D^{-1} constraint rows downstream).
template <class Scalar>
struct DesignSet {
  MatrixX<Scalar> x;           // raw design, n x p
  VectorX<Scalar> y;           // raw responses
  VectorX<Scalar> x_means;     // column means of x
  Scalar y_mean = 0;
  MatrixX<Scalar> xc;          // centered design
  VectorX<Scalar> yc;          // centered responses
  VectorX<Scalar> d;           // D_j = sqrt(mean of Xc_ij^2)
  VectorX<Scalar> quad_weights;
  std::vector<Index> dropped_columns;  // D_j below the drop tolerance

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }
  Scalar d_max() const { return d.size() ? d.maxCoeff() : Scalar(0); }
};

template <class Scalar>
DesignSet<Scalar> center(const MatrixX<Scalar>& x, const VectorX<Scalar>& y,
                         const VectorX<Scalar>& quad_weights = VectorX<Scalar>(),
                         Scalar drop_tol = Scalar(1e-12)) {
  if (x.rows() != y.size()) throw std::invalid_argument("center: row count of X must match y");
  if (x.rows() < 2) throw std::invalid_argument("center: at least two samples are required");
  DesignSet<Scalar> ds;
  ds.x = x;
  ds.y = y;
  ds.quad_weights = quad_weights;
  ds.x_means = x.colwise().mean();
  ds.y_mean = y.mean();
  ds.xc = x.rowwise() - ds.x_means.transpose();
  ds.yc = y.array() - ds.y_mean;
  ds.d = (ds.xc.colwise().squaredNorm() / Scalar(x.rows())).cwiseSqrt();
  for (Index j = 0; j < ds.d.size(); ++j)
    if (ds.d[j] < drop_tol) ds.dropped_columns.push_back(j);
  return ds;
}

}  // namespace gds
