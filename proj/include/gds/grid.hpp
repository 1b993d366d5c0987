#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

namespace gds {

using Index = Eigen::Index;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Evenly spaced evaluation grid on [0,1]^2, stored row-major:
/// point j = k*m2 + l has coordinates (t0 + k*delta1, s0 + l*delta2).
template <class Scalar>
struct GridSpec {
  Index m1 = 0;
  Index m2 = 0;
  Scalar t0 = 0;
  Scalar s0 = 0;
  Scalar delta1 = 0;
  Scalar delta2 = 0;

  /// Pixel-center grid: m1 x m2 cell midpoints with spacing 1/m.
  static GridSpec midpoints(Index m1, Index m2) {
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("GridSpec: grid sizes must be positive");
    GridSpec g;
    g.m1 = m1;
    g.m2 = m2;
    g.delta1 = Scalar(1) / Scalar(m1);
    g.delta2 = Scalar(1) / Scalar(m2);
    g.t0 = g.delta1 / Scalar(2);
    g.s0 = g.delta2 / Scalar(2);
    return g;
  }

  Index size() const { return m1 * m2; }

  std::pair<Scalar, Scalar> point(Index k, Index l) const {
    return {t0 + Scalar(k) * delta1, s0 + Scalar(l) * delta2};
  }

  std::pair<Scalar, Scalar> point(Index j) const { return point(j / m2, j % m2); }

  void validate() const {
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("GridSpec: grid sizes must be positive");
    if (m1 > 1 && delta1 <= Scalar(0)) throw std::invalid_argument("GridSpec: delta1 must be positive");
    if (m2 > 1 && delta2 <= Scalar(0)) throw std::invalid_argument("GridSpec: delta2 must be positive");
    const Scalar t_end = t0 + Scalar(m1 - 1) * delta1;
    const Scalar s_end = s0 + Scalar(m2 - 1) * delta2;
    if (t0 < Scalar(0) || s0 < Scalar(0) || t_end > Scalar(1) || s_end > Scalar(1))
      throw std::invalid_argument("GridSpec: grid points must lie in [0,1]^2");
  }
};

}  // namespace gds
