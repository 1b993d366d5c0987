#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gds/lp.hpp"

namespace gds {

template <class Scalar>
struct SolverOptions {
  Scalar feas_tol = Scalar(1e-8);
  Scalar opt_tol = Scalar(1e-8);
  Index max_iterations = 0;      // 0: scaled with problem size
  Index refactor_interval = 250;
};

namespace lps {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bounded-variable revised simplex on  min c.x  s.t.  A x = b,  lo <= x <= hi,
/// with dense LU factorization of the basis and product-form eta updates.
/// Pricing is Devex with lowest-index tie breaking; after a long run of
/// degenerate steps it falls back to Bland's rule until progress resumes,
/// which rules out cycling.
template <class Scalar>
class BoundedSimplex {
 public:
  struct Entry {
    Index row;
    Scalar val;
  };
  using Column = std::vector<Entry>;

  std::vector<Column> cols;
  std::vector<Scalar> cost;
  VectorX<Scalar> rhs;
  std::vector<Scalar> lo, hi;
  Index m = 0;

  Scalar feas_tol = Scalar(1e-9);
  Scalar dual_tol = Scalar(1e-9);
  Scalar pivot_tol = Scalar(1e-9);
  Index max_iter = 50000;
  Index refactor_interval = 250;

  LpStatus status = LpStatus::IterationLimit;
  std::vector<Scalar> x;  // full variable values on exit

  void add_column(Scalar c, Scalar lo_, Scalar hi_, Column col) {
    cols.push_back(std::move(col));
    cost.push_back(c);
    lo.push_back(lo_);
    hi.push_back(hi_);
  }

  Index num_cols() const { return static_cast<Index>(cols.size()); }

  void solve() {
    const Index n_struct = num_cols();
    basic_row_.assign(static_cast<size_t>(n_struct), -1);
    basis_.assign(static_cast<size_t>(m), -1);
    crash_basis();

    const Index n = num_cols();  // artificials appended by the crash
    x.assign(static_cast<size_t>(n), Scalar(0));
    state_.assign(static_cast<size_t>(n), AT_LOWER);
    for (Index j = 0; j < n; ++j) {
      if (basic_row_[static_cast<size_t>(j)] >= 0) {
        state_[static_cast<size_t>(j)] = BASIC;
      } else if (std::isfinite(lo[static_cast<size_t>(j)])) {
        state_[static_cast<size_t>(j)] = AT_LOWER;
        x[static_cast<size_t>(j)] = lo[static_cast<size_t>(j)];
      } else {
        state_[static_cast<size_t>(j)] = FREE_AT_ZERO;
      }
    }

    if (!refactor()) {  // crash bases are permuted diagonals; this cannot fail
      status = LpStatus::IterationLimit;
      return;
    }
    compute_basic_values();

    if (n > n_struct) {
      std::vector<Scalar> phase1_cost(static_cast<size_t>(n), Scalar(0));
      for (Index j = n_struct; j < n; ++j) phase1_cost[static_cast<size_t>(j)] = Scalar(1);
      if (!iterate(phase1_cost, /*phase1=*/true)) return;
      Scalar infeas = Scalar(0);
      for (Index j = n_struct; j < n; ++j) infeas += std::max(Scalar(0), x[static_cast<size_t>(j)]);
      const Scalar rhs_scale = m ? rhs.cwiseAbs().maxCoeff() : Scalar(0);
      if (infeas > feas_tol * Scalar(10) * (Scalar(1) + rhs_scale)) {
        status = LpStatus::Infeasible;
        return;
      }
      for (Index j = n_struct; j < n; ++j) {  // pin artificials at zero
        lo[static_cast<size_t>(j)] = hi[static_cast<size_t>(j)] = Scalar(0);
        if (basic_row_[static_cast<size_t>(j)] < 0) {
          x[static_cast<size_t>(j)] = Scalar(0);
          state_[static_cast<size_t>(j)] = AT_LOWER;
        }
      }
    }
    if (!iterate(cost, /*phase1=*/false)) return;
    status = LpStatus::Optimal;
  }

 private:
  enum State : char { BASIC, AT_LOWER, AT_UPPER, FREE_AT_ZERO };

  // One slack/singleton/artificial basic column per row.
  void crash_basis() {
    std::vector<char> used(static_cast<size_t>(num_cols()), 0);
    std::vector<std::vector<Index>> singletons(static_cast<size_t>(m));
    for (Index j = 0; j < num_cols(); ++j) {
      if (basic_row_[static_cast<size_t>(j)] >= 0) {  // restart path: drop old basis
        basic_row_[static_cast<size_t>(j)] = -1;
      }
      if (cols[static_cast<size_t>(j)].size() == 1)
        singletons[static_cast<size_t>(cols[static_cast<size_t>(j)][0].row)].push_back(j);
    }
    for (Index i = 0; i < m; ++i) {
      Index pick = -1;
      for (Index j : singletons[static_cast<size_t>(i)]) {
        if (used[static_cast<size_t>(j)]) continue;
        const Scalar a = cols[static_cast<size_t>(j)][0].val;
        if (a == Scalar(0)) continue;
        const Scalar v = rhs[i] / a;
        if (v >= lo[static_cast<size_t>(j)] - feas_tol && v <= hi[static_cast<size_t>(j)] + feas_tol) {
          pick = j;
          break;
        }
      }
      if (pick < 0) {
        const Scalar sign = rhs[i] >= Scalar(0) ? Scalar(1) : Scalar(-1);
        add_column(Scalar(0), Scalar(0), Scalar(kInf), Column{{i, sign}});
        basic_row_.push_back(-1);
        used.push_back(0);
        pick = num_cols() - 1;
      }
      used[static_cast<size_t>(pick)] = 1;
      basis_[static_cast<size_t>(i)] = pick;
      basic_row_[static_cast<size_t>(pick)] = i;
    }
  }

  bool refactor() {
    b0_.setZero(m, m);
    for (Index i = 0; i < m; ++i)
      for (const Entry& e : cols[static_cast<size_t>(basis_[static_cast<size_t>(i)])])
        b0_(e.row, i) = e.val;
    lu_.compute(b0_);
    etas_.clear();
    if (m == 0) return true;
    VectorX<Scalar> probe = lu_.solve(VectorX<Scalar>::Ones(m));
    if (!probe.allFinite()) return false;
    return (b0_ * probe - VectorX<Scalar>::Ones(m)).cwiseAbs().maxCoeff() < Scalar(1e-6) * Scalar(m);
  }

  void compute_basic_values() {
    VectorX<Scalar> r = rhs;
    for (Index j = 0; j < num_cols(); ++j) {
      if (state_[static_cast<size_t>(j)] == BASIC || x[static_cast<size_t>(j)] == Scalar(0)) continue;
      for (const Entry& e : cols[static_cast<size_t>(j)]) r[e.row] -= e.val * x[static_cast<size_t>(j)];
    }
    const VectorX<Scalar> xb = ftran(r);
    for (Index i = 0; i < m; ++i) x[static_cast<size_t>(basis_[static_cast<size_t>(i)])] = xb[i];
  }

  VectorX<Scalar> ftran(VectorX<Scalar> v) const {
    v = lu_.solve(v);
    for (const auto& [r, t] : etas_) {
      const Scalar piv = v[r] / t[r];
      v.noalias() -= piv * t;
      v[r] = piv;
    }
    return v;
  }

  VectorX<Scalar> btran(VectorX<Scalar> v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const auto& [r, t] = *it;
      const Scalar vr = v[r];
      v[r] = (vr - (t.dot(v) - t[r] * vr)) / t[r];
    }
    return lu_.transpose().solve(v);
  }

  Scalar col_dot(Index j, const VectorX<Scalar>& y) const {
    Scalar s = Scalar(0);
    for (const Entry& e : cols[static_cast<size_t>(j)]) s += e.val * y[e.row];
    return s;
  }

  // Returns true when the phase reached optimality, false on a terminal
  // status (infeasible restart budget, unbounded, or iteration limit).
  bool iterate(const std::vector<Scalar>& c, bool phase1) {
    VectorX<Scalar> devex = VectorX<Scalar>::Ones(num_cols());
    Index since_refactor = 0;
    Index degenerate_run = 0;
    bool bland = false;
    int restarts = 0;

    for (Index iter = 0; iter < max_iter; ++iter, ++since_refactor) {
      if (since_refactor >= refactor_interval ||
          static_cast<Index>(etas_.size()) >= refactor_interval) {
        if (!refactor()) {
          if (++restarts > 2) {
            status = LpStatus::IterationLimit;
            return false;
          }
          crash_basis();
          for (Index j = 0; j < num_cols(); ++j) {
            if (static_cast<size_t>(j) >= x.size()) {
              x.push_back(Scalar(0));
              state_.push_back(AT_LOWER);
            }
            state_[static_cast<size_t>(j)] =
                basic_row_[static_cast<size_t>(j)] >= 0
                    ? BASIC
                    : (std::isfinite(lo[static_cast<size_t>(j)]) ? AT_LOWER : FREE_AT_ZERO);
            if (state_[static_cast<size_t>(j)] == AT_LOWER) x[static_cast<size_t>(j)] = lo[static_cast<size_t>(j)];
            if (state_[static_cast<size_t>(j)] == FREE_AT_ZERO) x[static_cast<size_t>(j)] = Scalar(0);
          }
          devex = VectorX<Scalar>::Ones(num_cols());
          if (!refactor()) {
            status = LpStatus::IterationLimit;
            return false;
          }
        }
        compute_basic_values();
        since_refactor = 0;
      }

      VectorX<Scalar> cb(m);
      for (Index i = 0; i < m; ++i) cb[i] = c[static_cast<size_t>(basis_[static_cast<size_t>(i)])];
      const VectorX<Scalar> y = btran(cb);

      // Pricing: Devex score d^2/w maximized, or lowest eligible index under
      // Bland's rule.
      Index q = -1;
      Scalar best = Scalar(0);
      int dir = 0;
      for (Index j = 0; j < num_cols(); ++j) {
        const State st = state_[static_cast<size_t>(j)];
        if (st == BASIC || lo[static_cast<size_t>(j)] == hi[static_cast<size_t>(j)]) continue;
        const Scalar dj = c[static_cast<size_t>(j)] - col_dot(j, y);
        int candidate = 0;
        if (st == AT_LOWER && dj < -dual_tol) candidate = +1;
        else if (st == AT_UPPER && dj > dual_tol) candidate = -1;
        else if (st == FREE_AT_ZERO && dj < -dual_tol) candidate = +1;
        else if (st == FREE_AT_ZERO && dj > dual_tol) candidate = -1;
        if (candidate == 0) continue;
        if (bland) {
          q = j;
          dir = candidate;
          break;
        }
        const Scalar score = dj * dj / devex[j];
        if (score > best) {
          best = score;
          q = j;
          dir = candidate;
        }
      }
      if (q < 0) return true;  // phase optimal

      VectorX<Scalar> aq = VectorX<Scalar>::Zero(m);
      for (const Entry& e : cols[static_cast<size_t>(q)]) aq[e.row] = e.val;
      const VectorX<Scalar> t = ftran(aq);

      // Ratio test: x_q moves by dir*theta, basics by -dir*theta*t. Near-tied
      // blockers resolve toward the largest pivot (lowest variable index under
      // Bland's rule).
      const Scalar span = std::isfinite(hi[static_cast<size_t>(q)]) && std::isfinite(lo[static_cast<size_t>(q)])
                              ? hi[static_cast<size_t>(q)] - lo[static_cast<size_t>(q)]
                              : Scalar(kInf);
      Scalar theta = span;
      Index block = -1;  // -1: bound flip
      Scalar block_piv = Scalar(0);
      for (Index i = 0; i < m; ++i) {
        const Scalar ti = Scalar(dir) * t[i];
        if (std::abs(ti) <= pivot_tol) continue;
        const Index bj = basis_[static_cast<size_t>(i)];
        Scalar room;
        if (ti > Scalar(0))
          room = std::isfinite(lo[static_cast<size_t>(bj)])
                     ? (x[static_cast<size_t>(bj)] - lo[static_cast<size_t>(bj)]) / ti
                     : Scalar(kInf);
        else
          room = std::isfinite(hi[static_cast<size_t>(bj)])
                     ? (x[static_cast<size_t>(bj)] - hi[static_cast<size_t>(bj)]) / ti
                     : Scalar(kInf);
        room = std::max(room, Scalar(0));
        if (room < theta - Scalar(1e-12)) {
          theta = room;
          block = i;
          block_piv = std::abs(t[i]);
        } else if (block >= 0 && room <= theta + Scalar(1e-12)) {
          const bool better = bland ? bj < basis_[static_cast<size_t>(block)] : std::abs(t[i]) > block_piv;
          if (better) {
            block = i;
            block_piv = std::abs(t[i]);
            theta = std::min(theta, room);
          }
        }
      }
      if (!std::isfinite(theta)) {
        status = phase1 ? LpStatus::IterationLimit : LpStatus::Unbounded;
        return false;
      }

      degenerate_run = theta <= Scalar(1e-12) ? degenerate_run + 1 : 0;
      if (!bland && degenerate_run > 500) {
        bland = true;
        degenerate_run = 0;
      } else if (bland && theta > Scalar(1e-12)) {
        bland = false;
        devex.setOnes();
      }

      if (block < 0) {  // flip the entering variable to its opposite bound
        for (Index i = 0; i < m; ++i)
          if (t[i] != Scalar(0))
            x[static_cast<size_t>(basis_[static_cast<size_t>(i)])] -= Scalar(dir) * theta * t[i];
        x[static_cast<size_t>(q)] = dir > 0 ? hi[static_cast<size_t>(q)] : lo[static_cast<size_t>(q)];
        state_[static_cast<size_t>(q)] = dir > 0 ? AT_UPPER : AT_LOWER;
        continue;
      }

      const Index leave = basis_[static_cast<size_t>(block)];
      for (Index i = 0; i < m; ++i)
        if (t[i] != Scalar(0))
          x[static_cast<size_t>(basis_[static_cast<size_t>(i)])] -= Scalar(dir) * theta * t[i];
      x[static_cast<size_t>(q)] += Scalar(dir) * theta;
      const Scalar tl = Scalar(dir) * t[block];
      x[static_cast<size_t>(leave)] = tl > Scalar(0) ? lo[static_cast<size_t>(leave)] : hi[static_cast<size_t>(leave)];
      state_[static_cast<size_t>(leave)] = tl > Scalar(0) ? AT_LOWER : AT_UPPER;
      state_[static_cast<size_t>(q)] = BASIC;

      if (!bland) update_devex(devex, q, t, block);

      basis_[static_cast<size_t>(block)] = q;
      basic_row_[static_cast<size_t>(q)] = block;
      basic_row_[static_cast<size_t>(leave)] = -1;
      etas_.emplace_back(block, t);
    }
    status = LpStatus::IterationLimit;
    return false;
  }

  void update_devex(VectorX<Scalar>& devex, Index q, const VectorX<Scalar>& t, Index block) {
    const Scalar piv = t[block];
    if (piv == Scalar(0)) return;
    VectorX<Scalar> er = VectorX<Scalar>::Zero(m);
    er[block] = Scalar(1);
    const VectorX<Scalar> rho = btran(er);
    const Scalar wq = std::max(devex[q], Scalar(1));
    for (Index j = 0; j < num_cols(); ++j) {
      if (state_[static_cast<size_t>(j)] == BASIC || j == q) continue;
      const Scalar alpha = col_dot(j, rho);
      if (alpha == Scalar(0)) continue;
      const Scalar cand = (alpha / piv) * (alpha / piv) * wq;
      if (cand > devex[j]) devex[j] = cand;
    }
    devex[basis_[static_cast<size_t>(block)]] = std::max(wq / (piv * piv), Scalar(1));
  }

  std::vector<Index> basis_;      // row -> basic column
  std::vector<Index> basic_row_;  // column -> row, or -1 when nonbasic
  std::vector<State> state_;
  MatrixX<Scalar> b0_;
  Eigen::PartialPivLU<MatrixX<Scalar>> lu_;
  std::vector<std::pair<Index, VectorX<Scalar>>> etas_;
};

}  // namespace lps

/// Solves a LinearProgram with the bundled bounded-variable revised simplex.
///
/// Two exact presolve reductions are applied first: inequality row pairs that
/// are elementwise negations collapse into one range row with a bounded
/// slack, and zero-cost column pairs that are elementwise negations merge
/// into one free variable. Both are undone exactly on exit. Rows and columns
/// are equilibrated to unit max-norm before solving. Deterministic: identical
/// inputs produce identical outputs.
template <class Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& lp, const SolverOptions<Scalar>& opts = {}) {
  lp.validate();
  const Index n = lp.num_vars();
  const Index neq = lp.aeq.rows();
  const Index nub = lp.aub.rows();

  LpSolution<Scalar> sol;
  sol.z = VectorX<Scalar>::Zero(n);

  auto hash_mix = [](std::uint64_t h, Scalar v, Index pos) {
    std::uint64_t bits;
    const double dv = static_cast<double>(v);
    std::memcpy(&bits, &dv, 8);
    h = (h ^ bits) * 1099511628211ull;
    return (h ^ static_cast<std::uint64_t>(pos)) * 1099511628211ull;
  };

  // --- inequality rows: exact negation pairs become range rows ---------------
  struct RowInfo {
    Index hi_row = -1;  // original row providing the upper bound
    Scalar lo = -std::numeric_limits<Scalar>::infinity();
    Scalar hi = 0;
  };
  std::vector<RowInfo> ranged;
  std::vector<Index> pair_of(static_cast<size_t>(nub), -1);
  {
    auto row_hash = [&](Index i, Scalar sign) {
      std::uint64_t h = 1469598103934665603ull;
      for (Index j = 0; j < n; ++j)
        if (lp.aub(i, j) != Scalar(0)) h = hash_mix(h, sign * lp.aub(i, j), j);
      return h;
    };
    std::unordered_multimap<std::uint64_t, Index> seen;
    for (Index i = 0; i < nub; ++i) {
      Index partner = -1;
      auto range = seen.equal_range(row_hash(i, Scalar(-1)));
      for (auto it = range.first; it != range.second; ++it) {
        const Index k = it->second;
        if (pair_of[static_cast<size_t>(k)] >= 0) continue;
        if ((lp.aub.row(k).array() == -lp.aub.row(i).array()).all()) {
          partner = k;
          break;
        }
      }
      if (partner >= 0) {
        pair_of[static_cast<size_t>(partner)] = i;
        pair_of[static_cast<size_t>(i)] = partner;
        RowInfo info;
        info.hi_row = partner;
        info.hi = lp.bub[partner];
        info.lo = -lp.bub[i];
        if (info.lo > info.hi + opts.feas_tol) {
          sol.status = LpStatus::Infeasible;
          return sol;
        }
        ranged.push_back(info);
      } else {
        seen.emplace(row_hash(i, Scalar(1)), i);
      }
    }
    std::vector<char> in_range(static_cast<size_t>(nub), 0);
    for (const RowInfo& info : ranged) {
      in_range[static_cast<size_t>(info.hi_row)] = 1;
      // the paired (negated) row is marked through pair_of below
    }
    for (Index i = 0; i < nub; ++i)
      if (pair_of[static_cast<size_t>(i)] >= 0) in_range[static_cast<size_t>(i)] = 1;
    for (Index i = 0; i < nub; ++i) {
      if (in_range[static_cast<size_t>(i)]) continue;
      RowInfo info;
      info.hi_row = i;
      info.hi = lp.bub[i];
      ranged.push_back(info);
    }
  }
  const Index nrange = static_cast<Index>(ranged.size());
  const Index m = neq + nrange;

  auto col_entry = [&](Index j, Index r) -> Scalar {
    return r < neq ? lp.aeq(r, j) : lp.aub(ranged[static_cast<size_t>(r - neq)].hi_row, j);
  };

  // --- zero-cost columns: exact negation pairs become free variables ---------
  std::vector<Index> merged_with(static_cast<size_t>(n), -1);
  std::vector<char> dead(static_cast<size_t>(n), 0);
  {
    auto col_hash = [&](Index j, Scalar sign) {
      std::uint64_t h = 1469598103934665603ull;
      for (Index r = 0; r < m; ++r)
        if (col_entry(j, r) != Scalar(0)) h = hash_mix(h, sign * col_entry(j, r), r);
      return h;
    };
    auto cols_negated = [&](Index a, Index b) {
      for (Index r = 0; r < m; ++r)
        if (col_entry(a, r) != -col_entry(b, r)) return false;
      return true;
    };
    std::unordered_multimap<std::uint64_t, Index> seen;
    for (Index j = 0; j < n; ++j) {
      if (lp.c[j] != Scalar(0)) continue;
      Index partner = -1;
      auto range = seen.equal_range(col_hash(j, Scalar(-1)));
      for (auto it = range.first; it != range.second; ++it) {
        if (merged_with[static_cast<size_t>(it->second)] < 0 && cols_negated(it->second, j)) {
          partner = it->second;
          break;
        }
      }
      if (partner >= 0) {
        merged_with[static_cast<size_t>(partner)] = j;
        dead[static_cast<size_t>(j)] = 1;
      } else {
        seen.emplace(col_hash(j, Scalar(1)), j);
      }
    }
  }

  // --- scaling ----------------------------------------------------------------
  VectorX<Scalar> row_scale = VectorX<Scalar>::Ones(m);
  for (Index r = 0; r < m; ++r) {
    Scalar mx = Scalar(0);
    for (Index j = 0; j < n; ++j)
      if (!dead[static_cast<size_t>(j)]) mx = std::max(mx, std::abs(col_entry(j, r)));
    if (mx > Scalar(0)) row_scale[r] = Scalar(1) / mx;
  }
  VectorX<Scalar> col_scale = VectorX<Scalar>::Ones(n);
  for (Index j = 0; j < n; ++j) {
    if (dead[static_cast<size_t>(j)]) continue;
    Scalar mx = Scalar(0);
    for (Index r = 0; r < m; ++r) mx = std::max(mx, std::abs(col_entry(j, r)) * row_scale[r]);
    if (mx > Scalar(0)) col_scale[j] = Scalar(1) / mx;
  }

  // --- computational form -----------------------------------------------------
  lps::BoundedSimplex<Scalar> core;
  core.m = m;
  core.feas_tol = std::min(opts.feas_tol, Scalar(1e-9));
  core.dual_tol = std::min(opts.opt_tol, Scalar(1e-9));
  core.refactor_interval = opts.refactor_interval;

  std::vector<Index> core_col_of(static_cast<size_t>(n), -1);
  for (Index j = 0; j < n; ++j) {
    if (dead[static_cast<size_t>(j)]) continue;
    typename lps::BoundedSimplex<Scalar>::Column col;
    for (Index r = 0; r < m; ++r) {
      const Scalar v = col_entry(j, r) * row_scale[r] * col_scale[j];
      if (v != Scalar(0)) col.push_back({r, v});
    }
    if (col.empty()) {
      // A structurally empty nonnegative column: unbounded when its cost is
      // negative, otherwise fixed at zero.
      if (lp.c[j] < Scalar(0)) {
        sol.status = LpStatus::Unbounded;
        return sol;
      }
      dead[static_cast<size_t>(j)] = 1;
      merged_with[static_cast<size_t>(j)] = -1;
      continue;
    }
    const bool free_var = merged_with[static_cast<size_t>(j)] >= 0;
    core_col_of[static_cast<size_t>(j)] = core.num_cols();
    core.add_column(lp.c[j] * col_scale[j], free_var ? Scalar(-lps::kInf) : Scalar(0),
                    Scalar(lps::kInf), std::move(col));
  }
  for (Index r = 0; r < nrange; ++r) {
    const RowInfo& info = ranged[static_cast<size_t>(r)];
    const Scalar span =
        std::isfinite(info.lo) ? (info.hi - info.lo) * row_scale[neq + r] : Scalar(lps::kInf);
    core.add_column(Scalar(0), Scalar(0), std::max(span, Scalar(0)),
                    typename lps::BoundedSimplex<Scalar>::Column{{neq + r, Scalar(1)}});
  }
  VectorX<Scalar> b(m);
  for (Index r = 0; r < neq; ++r) b[r] = lp.beq[r];
  for (Index r = 0; r < nrange; ++r) b[neq + r] = ranged[static_cast<size_t>(r)].hi;
  core.rhs = b.cwiseProduct(row_scale);
  core.max_iter = opts.max_iterations > 0 ? opts.max_iterations
                                          : std::max<Index>(20000, 40 * (m + core.num_cols()));

  core.solve();
  sol.status = core.status;
  if (core.status != LpStatus::Optimal) return sol;

  for (Index j = 0; j < n; ++j) {
    if (core_col_of[static_cast<size_t>(j)] < 0) continue;
    const Scalar v = core.x[static_cast<size_t>(core_col_of[static_cast<size_t>(j)])] * col_scale[j];
    if (merged_with[static_cast<size_t>(j)] >= 0) {
      sol.z[j] = std::max(v, Scalar(0));
      sol.z[merged_with[static_cast<size_t>(j)]] = std::max(-v, Scalar(0));
    } else {
      sol.z[j] = std::max(v, Scalar(0));
    }
  }
  sol.objective = lp.c.dot(sol.z);

  Scalar resid = sol.z.size() ? std::max(Scalar(0), -sol.z.minCoeff()) : Scalar(0);
  if (neq) resid = std::max(resid, (lp.aeq * sol.z - lp.beq).cwiseAbs().maxCoeff());
  if (nub) resid = std::max(resid, (lp.aub * sol.z - lp.bub).maxCoeff());
  sol.primal_residual = std::max(resid, Scalar(0));
  return sol;
}

}  // namespace gds
