#pragma once

#include <Eigen/Dense>

#include <limits>
#include <ostream>
#include <stdexcept>

#include "gds/design.hpp"
#include "gds/diffops.hpp"

namespace gds {

/// Variable spans of the split formulation, in order
/// (gamma+, gamma-, eta+, eta-); all variables are nonnegative.
struct VarLayout {
  Index l = 0;  // gamma block length
  Index p = 0;  // eta block length

  Index gamma_plus() const { return 0; }
  Index gamma_minus() const { return l; }
  Index eta_plus() const { return 2 * l; }
  Index eta_minus() const { return 2 * l + p; }
  Index total() const { return 2 * l + 2 * p; }
};

/// min c.z  s.t.  Aeq z = beq,  Aub z <= bub,  z >= 0.
template <class Scalar>
struct LinearProgram {
  VectorX<Scalar> c;
  MatrixX<Scalar> aeq;
  VectorX<Scalar> beq;
  MatrixX<Scalar> aub;
  VectorX<Scalar> bub;
  VarLayout layout;

  Index num_vars() const { return c.size(); }

  void validate() const {
    if (aeq.rows() != beq.size() || aub.rows() != bub.size())
      throw std::invalid_argument("LinearProgram: right-hand side lengths must match the blocks");
    if ((aeq.rows() && aeq.cols() != c.size()) || (aub.rows() && aub.cols() != c.size()))
      throw std::invalid_argument("LinearProgram: block column counts must match the cost vector");
    if (bub.size() && !bub.allFinite())
      throw std::invalid_argument("LinearProgram: inequality bounds must be finite");
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

template <class Scalar>
struct LpSolution {
  VectorX<Scalar> z;
  Scalar objective = 0;
  LpStatus status = LpStatus::IterationLimit;
  Scalar primal_residual = 0;  // max constraint/bound violation
};

/// The estimator's linear program on centered data: minimize the l1 norm of
/// gamma = A eta subject to the residual-correlation box
///   |Xc' (yc - Xc eta)| <= n lambda D  (componentwise, dropped columns skipped),
/// in split variables (gamma+, gamma-, eta+, eta-).
template <class Scalar>
LinearProgram<Scalar> build_gds_lp(const DesignSet<Scalar>& ds, const TransformA<Scalar>& a,
                                   Scalar lambda) {
  if (lambda <= Scalar(0)) throw std::invalid_argument("build_gds_lp: lambda must be positive");
  if (a.values.cols() != ds.p())
    throw std::invalid_argument("build_gds_lp: transform width must match the design");
  const Index l = a.rows;
  const Index p = ds.p();
  const Index n = ds.n();

  LinearProgram<Scalar> lp;
  lp.layout = VarLayout{l, p};
  lp.c = VectorX<Scalar>::Zero(lp.layout.total());
  lp.c.head(2 * l).setOnes();

  // A(eta+ - eta-) - (gamma+ - gamma-) = 0
  lp.aeq = MatrixX<Scalar>::Zero(l, lp.layout.total());
  lp.aeq.block(0, lp.layout.gamma_plus(), l, l) = -MatrixX<Scalar>::Identity(l, l);
  lp.aeq.block(0, lp.layout.gamma_minus(), l, l) = MatrixX<Scalar>::Identity(l, l);
  lp.aeq.block(0, lp.layout.eta_plus(), l, p) = a.values;
  lp.aeq.block(0, lp.layout.eta_minus(), l, p) = -a.values;
  lp.beq = VectorX<Scalar>::Zero(l);

  std::vector<Index> kept;
  kept.reserve(p);
  {
    size_t next_drop = 0;
    for (Index j = 0; j < p; ++j) {
      if (next_drop < ds.dropped_columns.size() && ds.dropped_columns[next_drop] == j) {
        ++next_drop;
        continue;
      }
      kept.push_back(j);
    }
  }
  const Index rows = static_cast<Index>(kept.size());
  const MatrixX<Scalar> xtx = ds.xc.transpose() * ds.xc;
  const VectorX<Scalar> xty = ds.xc.transpose() * ds.yc;

  lp.aub = MatrixX<Scalar>::Zero(2 * rows, lp.layout.total());
  lp.bub = VectorX<Scalar>::Zero(2 * rows);
  for (Index r = 0; r < rows; ++r) {
    const Index j = kept[static_cast<size_t>(r)];
    const Scalar bound = Scalar(n) * lambda * ds.d[j];
    lp.aub.row(r).segment(lp.layout.eta_plus(), p) = xtx.row(j);
    lp.aub.row(r).segment(lp.layout.eta_minus(), p) = -xtx.row(j);
    lp.bub[r] = bound + xty[j];
    lp.aub.row(rows + r).segment(lp.layout.eta_plus(), p) = -xtx.row(j);
    lp.aub.row(rows + r).segment(lp.layout.eta_minus(), p) = xtx.row(j);
    lp.bub[rows + r] = bound - xty[j];
  }
  return lp;
}

/// Plain-text standard-form dump for cross-checking against external solvers.
/// Layout: one header line "gds-lp <vars> <eq-rows> <ub-rows>", then the cost
/// vector, then each equality row followed by its right-hand side, then each
/// inequality row followed by its bound, whitespace separated.
template <class Scalar>
void dump_lp(const LinearProgram<Scalar>& lp, std::ostream& os) {
  const auto saved = os.precision(std::numeric_limits<Scalar>::max_digits10);
  os << "gds-lp " << lp.num_vars() << ' ' << lp.aeq.rows() << ' ' << lp.aub.rows() << '\n';
  for (Index j = 0; j < lp.c.size(); ++j) os << (j ? " " : "") << lp.c[j];
  os << '\n';
  for (Index i = 0; i < lp.aeq.rows(); ++i) {
    for (Index j = 0; j < lp.aeq.cols(); ++j) os << lp.aeq(i, j) << ' ';
    os << lp.beq[i] << '\n';
  }
  for (Index i = 0; i < lp.aub.rows(); ++i) {
    for (Index j = 0; j < lp.aub.cols(); ++j) os << lp.aub(i, j) << ' ';
    os << lp.bub[i] << '\n';
  }
  os.precision(saved);
}

}  // namespace gds
