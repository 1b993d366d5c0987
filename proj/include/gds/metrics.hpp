#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "gds/grid.hpp"

namespace gds {

template <class Scalar>
Scalar mse(const VectorX<Scalar>& y_hat, const VectorX<Scalar>& y) {
  if (y_hat.size() != y.size() || y.size() == 0)
    throw std::invalid_argument("mse: inputs must have equal positive length");
  return (y_hat - y).squaredNorm() / Scalar(y.size());
}

template <class Scalar>
std::pair<Scalar, Scalar> rmse_mae(const VectorX<Scalar>& y_hat, const VectorX<Scalar>& y) {
  if (y_hat.size() != y.size() || y.size() == 0)
    throw std::invalid_argument("rmse_mae: inputs must have equal positive length");
  const VectorX<Scalar> e = y_hat - y;
  return {std::sqrt(e.squaredNorm() / Scalar(e.size())), e.cwiseAbs().sum() / Scalar(e.size())};
}

/// Truth and estimate sampled on a shared grid with quadrature weights.
template <class Scalar>
struct SurfacePair {
  VectorX<Scalar> truth;
  VectorX<Scalar> estimate;
  VectorX<Scalar> weights;

  void validate() const {
    if (truth.size() != estimate.size() || truth.size() != weights.size())
      throw std::invalid_argument("SurfacePair: truth, estimate, and weights must share one grid");
  }
};

/// Integrated squared error of the estimate relative to the integrated
/// squared truth, both under the pair's quadrature rule.
template <class Scalar>
Scalar rise(const SurfacePair<Scalar>& pair) {
  pair.validate();
  const VectorX<Scalar> diff = pair.estimate - pair.truth;
  const Scalar denom = pair.truth.cwiseProduct(pair.truth).dot(pair.weights);
  if (denom <= Scalar(0)) throw std::invalid_argument("rise: truth surface is identically zero");
  return diff.cwiseProduct(diff).dot(pair.weights) / denom;
}

/// Weighted fraction of the truth's zero region where the estimate is also
/// zero, both sides classified with the shared magnitude threshold.
template <class Scalar>
Scalar zero_recovery_r1(const SurfacePair<Scalar>& pair, Scalar threshold = Scalar(1e-8)) {
  pair.validate();
  Scalar hit = 0, total = 0;
  for (Index j = 0; j < pair.truth.size(); ++j) {
    if (std::abs(pair.truth[j]) > threshold) continue;
    total += pair.weights[j];
    if (std::abs(pair.estimate[j]) <= threshold) hit += pair.weights[j];
  }
  if (total <= Scalar(0)) throw std::invalid_argument("zero_recovery_r1: truth has no zero region");
  return hit / total;
}

/// Weighted fraction of the truth's nonzero region where the estimate is also
/// nonzero.
template <class Scalar>
Scalar nonzero_recovery_r2(const SurfacePair<Scalar>& pair, Scalar threshold = Scalar(1e-8)) {
  pair.validate();
  Scalar hit = 0, total = 0;
  for (Index j = 0; j < pair.truth.size(); ++j) {
    if (std::abs(pair.truth[j]) <= threshold) continue;
    total += pair.weights[j];
    if (std::abs(pair.estimate[j]) > threshold) hit += pair.weights[j];
  }
  if (total <= Scalar(0)) throw std::invalid_argument("nonzero_recovery_r2: truth is identically zero");
  return hit / total;
}

/// Signal-to-noise ratio: sample variance of the signal values over the
/// noise variance sigma^2.
template <class Scalar>
Scalar snr(const VectorX<Scalar>& f_values, Scalar sigma) {
  if (sigma <= Scalar(0)) throw std::invalid_argument("snr: sigma must be positive");
  if (f_values.size() < 2) throw std::invalid_argument("snr: at least two samples are required");
  const Scalar mean = f_values.mean();
  const Scalar var = (f_values.array() - mean).square().sum() / Scalar(f_values.size() - 1);
  return var / (sigma * sigma);
}

}  // namespace gds
