#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "gds/bases.hpp"
#include "gds/grid.hpp"

namespace gds {

/// d-th order difference matrix of size (m-d) x m with entries
/// (i, i+k) = (-1)^k * binom(d,k); d = 0 gives the identity.
template <class Scalar>
MatrixX<Scalar> difference_matrix(Index m, int d) {
  if (d < 0) throw std::invalid_argument("difference_matrix: order must be nonnegative");
  if (Index(d) >= m) throw std::invalid_argument("difference_matrix: order must be smaller than the length");
  VectorX<Scalar> coef(d + 1);
  coef[0] = Scalar(1);
  for (int k = 1; k <= d; ++k) coef[k] = -coef[k - 1] * Scalar(d - k + 1) / Scalar(k);
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(m - d, m);
  for (Index i = 0; i < m - d; ++i)
    for (int k = 0; k <= d; ++k) out(i, i + k) = coef[k];
  return out;
}

/// Kronecker product in the grid's row-major pairing: (t-factor) x (s-factor).
template <class Scalar>
MatrixX<Scalar> kronecker(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  MatrixX<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Bivariate difference operator (1/delta1)^d1 (1/delta2)^d2 D^d1 (x) D^d2,
/// acting on row-major grid samples.
template <class Scalar>
MatrixX<Scalar> bivariate_operator(Index m1, Index m2, int d1, int d2, Scalar delta1, Scalar delta2) {
  if (delta1 <= Scalar(0) || delta2 <= Scalar(0))
    throw std::invalid_argument("bivariate_operator: grid spacings must be positive");
  const Scalar scale = std::pow(Scalar(1) / delta1, Scalar(d1)) * std::pow(Scalar(1) / delta2, Scalar(d2));
  return scale * kronecker<Scalar>(difference_matrix<Scalar>(m1, d1), difference_matrix<Scalar>(m2, d2));
}

enum class TransformVariant { Joint, Separable };

/// The transform whose image gamma = A eta stacks the weighted surface values
/// with grid-difference approximations of its derivatives.
///   joint:     [w I; A^{d1,d2}] B^T,            L = m1 m2 + (m1-d1)(m2-d2)
///   separable: [w I; A^{d1,0}; A^{0,d2}] B^T,   L = m1 m2 + (m1-d1) m2 + m1 (m2-d2)
template <class Scalar>
struct TransformA {
  TransformVariant variant = TransformVariant::Joint;
  Scalar w = 0;
  int d1 = 0;
  int d2 = 0;
  GridSpec<Scalar> grid;
  MatrixX<Scalar> values;     // L x p
  Index rows = 0;             // L
  Scalar sigma_min = 0;       // smallest singular value
  bool degenerate = false;    // some column of the result is identically zero
};

template <class Scalar>
TransformA<Scalar> assemble_transform(TransformVariant variant, Scalar w, int d1, int d2,
                                      const GridSpec<Scalar>& grid, const BasisMatrix<Scalar>& bt) {
  grid.validate();
  if (w < Scalar(0)) throw std::invalid_argument("assemble_transform: weight must be nonnegative");
  if (bt.values.rows() != grid.size())
    throw std::invalid_argument("assemble_transform: basis matrix does not match the grid");
  const Index m1 = grid.m1, m2 = grid.m2;
  const Index p = bt.values.cols();
  // Spacing 1 is the degenerate single-point-axis convention; validate() has
  // already rejected nonpositive spacings on multi-point axes.
  const Scalar h1 = m1 > 1 ? grid.delta1 : Scalar(1);
  const Scalar h2 = m2 > 1 ? grid.delta2 : Scalar(1);

  TransformA<Scalar> a;
  a.variant = variant;
  a.w = w;
  a.d1 = d1;
  a.d2 = d2;
  a.grid = grid;
  if (variant == TransformVariant::Joint) {
    const MatrixX<Scalar> biv = bivariate_operator<Scalar>(m1, m2, d1, d2, h1, h2);
    a.rows = m1 * m2 + biv.rows();
    a.values.resize(a.rows, p);
    a.values.topRows(m1 * m2) = w * bt.values;
    a.values.bottomRows(biv.rows()).noalias() = biv * bt.values;
  } else {
    const MatrixX<Scalar> along_t = bivariate_operator<Scalar>(m1, m2, d1, 0, h1, Scalar(1));
    const MatrixX<Scalar> along_s = bivariate_operator<Scalar>(m1, m2, 0, d2, Scalar(1), h2);
    a.rows = m1 * m2 + along_t.rows() + along_s.rows();
    a.values.resize(a.rows, p);
    a.values.topRows(m1 * m2) = w * bt.values;
    a.values.middleRows(m1 * m2, along_t.rows()).noalias() = along_t * bt.values;
    a.values.bottomRows(along_s.rows()).noalias() = along_s * bt.values;
  }
  for (Index j = 0; j < p && !a.degenerate; ++j)
    if (a.values.col(j).cwiseAbs().maxCoeff() == Scalar(0)) a.degenerate = true;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a.values);
  a.sigma_min = a.degenerate ? Scalar(0) : svd.singularValues().minCoeff();
  return a;
}

/// Moore-Penrose pseudoinverse of a full-column-rank transform, satisfying
/// pinv(A) * A = I.
template <class Scalar>
MatrixX<Scalar> pseudoinverse(const TransformA<Scalar>& a, Scalar tol = Scalar(1e-10)) {
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a.values, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv.minCoeff() <= tol * std::max(Scalar(1), sv.maxCoeff()))
    throw std::runtime_error("pseudoinverse: transform is rank deficient (sigma_min = " +
                             std::to_string(static_cast<double>(sv.size() ? sv.minCoeff() : Scalar(0))) + ")");
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

}  // namespace gds
