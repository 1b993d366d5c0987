#include <doctest.h>

#include <random>
#include <sstream>

#include "gds/lp.hpp"
#include "gds/simplex.hpp"
#include "test_helpers.hpp"

using namespace gds;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

DesignSet<double> random_design(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd x(n, p);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = normal(rng);
    y[i] = normal(rng);
  }
  return center(x, y);
}

TransformA<double> small_transform(Index m1, Index m2, double w, int d1, int d2) {
  const auto grid = GridSpec<double>::midpoints(m1, m2);
  const auto bt = basis_matrix(BasisSpec<double>::piecewise(m1, m2), grid);
  return assemble_transform(TransformVariant::Joint, w, d1, d2, grid, bt);
}

double correlation_norm(const DesignSet<double>& ds, const VectorXd& eta) {
  const VectorXd resid = ds.yc - ds.xc * eta;
  double out = 0.0;
  for (Index j = 0; j < ds.p(); ++j) {
    if (ds.d[j] <= 1e-12) continue;
    out = std::max(out, std::abs(ds.xc.col(j).dot(resid)) / (double(ds.n()) * ds.d[j]));
  }
  return out;
}

}  // namespace

TEST_CASE("gds lp shape arithmetic") {
  const auto ds = random_design(15, 9, 1);
  const auto a = small_transform(3, 3, 1.0, 1, 1);
  const auto lp = build_gds_lp(ds, a, 0.5);
  const Index l = 9 + 2 * 2;
  CHECK(lp.layout.l == l);
  CHECK(lp.layout.p == 9);
  CHECK(lp.num_vars() == 2 * l + 2 * 9);
  CHECK(lp.aeq.rows() == l);
  CHECK(lp.aub.rows() == 2 * 9);
  CHECK(lp.c.head(2 * l).minCoeff() == 1.0);
  CHECK(lp.c.tail(2 * 9).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lp.bub.allFinite());
}

TEST_CASE("zero solution is feasible and optimal for large lambda") {
  const auto ds = random_design(25, 9, 2);
  const auto a = small_transform(3, 3, 1.0, 1, 1);
  const double lambda_max = correlation_norm(ds, VectorXd::Zero(9));
  const auto lp = build_gds_lp(ds, a, lambda_max * 1.01);
  const auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::Optimal);
  CHECK(sol.objective <= 1e-9);
  CHECK(sol.primal_residual <= 1e-8);
}

TEST_CASE("a one-variable lp") {
  LinearProgram<double> lp;
  lp.c = VectorXd::Ones(1);
  lp.aeq = MatrixXd::Zero(0, 1);
  lp.beq = VectorXd::Zero(0);
  lp.aub = MatrixXd::Constant(1, 1, -1.0);
  lp.bub = VectorXd::Constant(1, -1.0);
  const auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::Optimal);
  CHECK(sol.z[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("infeasible and unbounded statuses are reported") {
  LinearProgram<double> lp;
  lp.c = VectorXd::Ones(1);
  lp.aeq = MatrixXd::Zero(0, 1);
  lp.beq = VectorXd::Zero(0);
  lp.aub = MatrixXd::Constant(1, 1, 1.0);
  lp.bub = VectorXd::Constant(1, -2.0);  // x <= -2 with x >= 0
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);

  LinearProgram<double> unb;
  unb.c = VectorXd::Constant(1, -1.0);
  unb.aeq = MatrixXd::Zero(0, 1);
  unb.beq = VectorXd::Zero(0);
  unb.aub = MatrixXd::Zero(0, 1);
  unb.bub = VectorXd::Zero(0);
  CHECK(solve_lp(unb).status == LpStatus::Unbounded);

  LinearProgram<double> unb2;  // direction escapes through a slack-free ray
  unb2.c = VectorXd::Constant(2, -1.0);
  unb2.aeq = MatrixXd::Zero(0, 2);
  unb2.beq = VectorXd::Zero(0);
  unb2.aub = MatrixXd::Zero(1, 2);
  unb2.aub(0, 0) = 1.0;
  unb2.aub(0, 1) = -1.0;
  unb2.bub = VectorXd::Constant(1, 1.0);
  CHECK(solve_lp(unb2).status == LpStatus::Unbounded);
}

TEST_CASE("random small lps match the vertex-enumeration oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Index nvar = 2 + (trial % 3);
    const Index nrow = 3 + (trial % 4);
    MatrixXd a(nrow, nvar);
    VectorXd b(nrow);
    VectorXd c(nvar);
    for (Index i = 0; i < nrow; ++i) {
      for (Index j = 0; j < nvar; ++j) a(i, j) = normal(rng);
      b[i] = unif(rng);  // origin feasible
    }
    for (Index j = 0; j < nvar; ++j) c[j] = normal(rng);
    // keep the problem bounded: add a box on each variable
    MatrixXd a_box(nrow + nvar, nvar);
    VectorXd b_box(nrow + nvar);
    a_box.topRows(nrow) = a;
    b_box.head(nrow) = b;
    a_box.bottomRows(nvar) = MatrixXd::Identity(nvar, nvar);
    b_box.tail(nvar).setConstant(5.0);

    LinearProgram<double> lp;
    lp.c = c;
    lp.aeq = MatrixXd::Zero(0, nvar);
    lp.beq = VectorXd::Zero(0);
    lp.aub = a_box;
    lp.bub = b_box;
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);

    const auto oracle = gds_test::brute_force_lp(c, a_box, b_box);
    REQUIRE(oracle.feasible_vertex_found);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-8));
    CHECK(sol.primal_residual <= 1e-8);
  }
}

TEST_CASE("two-variable lp with three constraints matches enumeration") {
  MatrixXd a(3, 2);
  a << 1.0, 2.0, 3.0, -1.0, -1.0, 1.0;
  VectorXd b(3);
  b << 4.0, 6.0, 1.0;
  VectorXd c(2);
  c << -1.0, -1.0;
  LinearProgram<double> lp;
  lp.c = c;
  lp.aeq = MatrixXd::Zero(0, 2);
  lp.beq = VectorXd::Zero(0);
  lp.aub = a;
  lp.bub = b;
  const auto sol = solve_lp(lp);
  const auto oracle = gds_test::brute_force_lp(c, a, b);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-8));
  CHECK((sol.z - oracle.x).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("equality-constrained lp with free-variable merge") {
  // min u+ + u-  s.t.  x1 - x2 - (u+ - u-) = 3, x <= 5; the split column
  // pairs (x1, x2) merge into one free variable inside the solver.
  LinearProgram<double> lp;
  lp.c = VectorXd::Zero(4);
  lp.c[2] = 1.0;
  lp.c[3] = 1.0;
  lp.aeq = MatrixXd::Zero(1, 4);
  lp.aeq << 1.0, -1.0, -1.0, 1.0;
  lp.beq = VectorXd::Constant(1, 3.0);
  lp.aub = MatrixXd::Zero(2, 4);
  lp.aub(0, 0) = 1.0;
  lp.aub(1, 1) = 1.0;
  lp.bub = VectorXd::Constant(2, 5.0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol.z[0] - sol.z[1] == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("gds lp solution properties on a random instance") {
  const auto ds = random_design(40, 16, 23);
  const auto a = small_transform(4, 4, 1.0, 1, 1);
  const double lambda = 0.35 * correlation_norm(ds, VectorXd::Zero(16));
  const auto lp = build_gds_lp(ds, a, lambda);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.primal_residual <= 1e-8);

  const Index l = lp.layout.l;
  const Index p = lp.layout.p;
  const VectorXd gp = sol.z.segment(lp.layout.gamma_plus(), l);
  const VectorXd gm = sol.z.segment(lp.layout.gamma_minus(), l);
  const VectorXd eta =
      sol.z.segment(lp.layout.eta_plus(), p) - sol.z.segment(lp.layout.eta_minus(), p);

  // split complementarity: an l1 optimum never pays for both signs
  for (Index j = 0; j < l; ++j) CHECK(std::min(gp[j], gm[j]) <= 1e-7);
  // correlation feasibility
  CHECK(correlation_norm(ds, eta) <= lambda + 1e-7);
  // objective equals the l1 norm of the transformed coefficients
  CHECK(sol.objective == doctest::Approx((a.values * eta).cwiseAbs().sum()).epsilon(1e-7));
}

TEST_CASE("lambda monotonicity of the optimal objective") {
  const auto ds = random_design(30, 9, 29);
  const auto a = small_transform(3, 3, 1.0, 1, 1);
  const double lambda_max = correlation_norm(ds, VectorXd::Zero(9));
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    const double lambda = lambda_max * std::pow(0.7, 9 - k);  // increasing sequence
    const auto sol = solve_lp(build_gds_lp(ds, a, lambda));
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective <= prev + 1e-7);
    prev = sol.objective;
  }
}

TEST_CASE("least-squares coefficients are always feasible") {
  const auto ds = random_design(50, 12, 31);
  const VectorXd eta_ls = ds.xc.colPivHouseholderQr().solve(ds.yc);
  CHECK(correlation_norm(ds, eta_ls) <= 1e-8);
}

TEST_CASE("solver determinism: identical inputs give identical bytes") {
  const auto ds = random_design(30, 9, 37);
  const auto a = small_transform(3, 3, 1.0, 1, 1);
  const double lambda = 0.4 * correlation_norm(ds, VectorXd::Zero(9));
  const auto s1 = solve_lp(build_gds_lp(ds, a, lambda));
  const auto s2 = solve_lp(build_gds_lp(ds, a, lambda));
  REQUIRE(s1.status == LpStatus::Optimal);
  CHECK(s1.status == s2.status);
  CHECK((s1.z - s2.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s1.objective == s2.objective);
}

TEST_CASE("standard-form dump round-trips through a text stream") {
  const auto ds = random_design(10, 4, 41);
  const auto a = small_transform(2, 2, 1.0, 1, 1);
  const auto lp = build_gds_lp(ds, a, 0.7);
  std::ostringstream os;
  dump_lp(lp, os);
  std::istringstream is(os.str());
  std::string tag;
  Index nvars, neq, nub;
  is >> tag >> nvars >> neq >> nub;
  CHECK(tag == "gds-lp");
  CHECK(nvars == lp.num_vars());
  CHECK(neq == lp.aeq.rows());
  CHECK(nub == lp.aub.rows());
  VectorXd c(nvars);
  for (Index j = 0; j < nvars; ++j) is >> c[j];
  CHECK((c - lp.c).cwiseAbs().maxCoeff() == 0.0);
  double v = 0.0;
  for (Index i = 0; i < neq; ++i) {
    for (Index j = 0; j <= nvars; ++j) REQUIRE((is >> v));
    CHECK(v == lp.beq[i]);
  }
  for (Index i = 0; i < nub; ++i) {
    for (Index j = 0; j <= nvars; ++j) REQUIRE((is >> v));
    CHECK(v == lp.bub[i]);
  }
}

TEST_CASE("build_gds_lp rejects bad inputs") {
  const auto ds = random_design(10, 4, 43);
  const auto a = small_transform(2, 2, 1.0, 1, 1);
  CHECK_THROWS_AS(build_gds_lp(ds, a, 0.0), std::invalid_argument);
  const auto wrong = small_transform(3, 3, 1.0, 1, 1);
  CHECK_THROWS_AS(build_gds_lp(ds, wrong, 0.5), std::invalid_argument);
}

TEST_CASE("dropped columns remove their constraint rows") {
  MatrixXd x(6, 3);
  x << 1, 0.5, 2, 1, -0.5, 1, 1, 1.5, 0, 1, 2.5, 3, 1, -1.5, 2, 1, 0.5, 1;  // first column constant
  VectorXd y(6);
  y << 1, 2, 3, 2, 1, 2;
  const auto ds = center(x, y);
  REQUIRE(ds.dropped_columns.size() == 1);
  const auto grid = GridSpec<double>::midpoints(3, 1);
  const auto bt = basis_matrix(BasisSpec<double>::piecewise(3, 1), grid);
  const auto a = assemble_transform(TransformVariant::Joint, 1.0, 1, 0, grid, bt);
  const auto lp = build_gds_lp(ds, a, 0.5);
  CHECK(lp.aub.rows() == 2 * 2);  // one retained pair per surviving column
}
