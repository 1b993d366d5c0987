#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>

#include "gds/grid.hpp"

namespace gds {

/// Univariate B-spline family of polynomial degree `degree` on [0,1] with
/// `interior` evenly spaced interior knots and clamped (repeated) boundary
/// knots, so evaluation is well defined on the closed interval.
template <class Scalar>
struct BsplineFamily {
  int degree = 0;
  VectorX<Scalar> knots;  // length: count() + degree + 1

  BsplineFamily() = default;

  BsplineFamily(int degree_, Index interior) : degree(degree_) {
    if (degree_ < 0) throw std::invalid_argument("BsplineFamily: degree must be nonnegative");
    if (interior < 0) throw std::invalid_argument("BsplineFamily: interior knot count must be nonnegative");
    const Index nb = interior + degree_ + 1;
    knots.resize(nb + degree_ + 1);
    for (int i = 0; i <= degree_; ++i) knots[i] = Scalar(0);
    for (Index i = 1; i <= interior; ++i) knots[degree_ + i] = Scalar(i) / Scalar(interior + 1);
    for (Index i = nb; i < knots.size(); ++i) knots[i] = Scalar(1);
  }

  Index count() const { return knots.size() - degree - 1; }

  /// Index of the knot span containing t, with t = 1 mapped to the last span.
  Index span(Scalar t) const {
    const Index nb = count();
    if (t >= knots[nb]) return nb - 1;
    Index lo = degree, hi = nb;
    while (hi - lo > 1) {
      const Index mid = (lo + hi) / 2;
      (t < knots[mid] ? hi : lo) = mid;
    }
    return lo;
  }

  /// All basis values at t (Cox-de Boor), scattered into a dense vector.
  VectorX<Scalar> eval(Scalar t) const {
    VectorX<Scalar> out = VectorX<Scalar>::Zero(count());
    const Index i = span(t);
    // N[r] holds the value of basis function i - degree + r on the current level.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> N(degree + 1), left(degree + 1), right(degree + 1);
    N[0] = Scalar(1);
    for (int j = 1; j <= degree; ++j) {
      left[j] = t - knots[i + 1 - j];
      right[j] = knots[i + j] - t;
      Scalar saved = Scalar(0);
      for (int r = 0; r < j; ++r) {
        const Scalar denom = right[r + 1] + left[j - r];
        const Scalar temp = denom == Scalar(0) ? Scalar(0) : N[r] / denom;
        N[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      N[j] = saved;
    }
    for (int r = 0; r <= degree; ++r) out[i - degree + r] = N[r];
    return out;
  }
};

/// Nodes and weights of the 8-point Gauss-Legendre rule on [-1,1].
template <class Scalar>
struct GaussLegendre8 {
  static constexpr std::array<double, 8> nodes = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> weights = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
};

/// Integrals of squared basis functions over [0,1], one entry per basis
/// function, by per-span Gauss-Legendre quadrature (exact for the polynomial
/// degrees involved).
template <class Scalar>
VectorX<Scalar> bspline_squared_integrals(const BsplineFamily<Scalar>& fam) {
  VectorX<Scalar> out = VectorX<Scalar>::Zero(fam.count());
  const Index first = fam.degree;
  const Index last = fam.count();  // spans run over [knots[i], knots[i+1]) for i in [first, last)
  for (Index i = first; i < last; ++i) {
    const Scalar a = fam.knots[i], b = fam.knots[i + 1];
    if (b <= a) continue;
    const Scalar half = (b - a) / Scalar(2), mid = (a + b) / Scalar(2);
    for (int q = 0; q < 8; ++q) {
      const Scalar t = mid + half * Scalar(GaussLegendre8<Scalar>::nodes[q]);
      const Scalar w = half * Scalar(GaussLegendre8<Scalar>::weights[q]);
      const VectorX<Scalar> v = fam.eval(t);
      out += w * v.cwiseProduct(v);
    }
  }
  return out;
}

}  // namespace gds
