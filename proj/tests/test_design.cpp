#include <doctest.h>

#include <random>

#include "gds/design.hpp"

using namespace gds;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
ImageSample<double> constant_image(const GridSpec<double>& grid, double value) {
  ImageSample<double> img;
  img.values = VectorXd::Constant(grid.size(), value);
  return img;
}

ImageSample<double> random_image(const GridSpec<double>& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ImageSample<double> img;
  img.values.resize(grid.size());
  for (Index j = 0; j < grid.size(); ++j) img.values[j] = normal(rng);
  return img;
}
}  // namespace

TEST_CASE("equal weights sum to the unit area") {
  const auto grid = GridSpec<double>::midpoints(20, 20);
  const VectorXd w = quadrature_weights(grid);
  CHECK(w.size() == 400);
  for (Index j = 0; j < w.size(); ++j) CHECK(w[j] == doctest::Approx(0.0025).epsilon(1e-15));
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("masked weights keep area proportionality") {
  const auto grid = GridSpec<double>::midpoints(2, 2);
  std::vector<bool> mask{true, true, true, false};
  const VectorXd w = quadrature_weights(grid, &mask);
  CHECK(w[0] == 0.25);
  CHECK(w[1] == 0.25);
  CHECK(w[2] == 0.25);
  CHECK(w[3] == 0.0);

  std::vector<bool> none(4, false);
  CHECK_THROWS_AS(quadrature_weights(grid, &none), std::invalid_argument);
}

TEST_CASE("constant image integrates to the area") {
  const auto grid = GridSpec<double>::midpoints(13, 9);
  const VectorXd w = quadrature_weights(grid);
  const auto img = constant_image(grid, 1.0);
  CHECK(img.values.dot(w) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("design entries for indicator bases are piece areas") {
  const auto grid = GridSpec<double>::midpoints(20, 20);
  const auto bt = basis_matrix(BasisSpec<double>::piecewise(2, 2), grid);
  const VectorXd w = quadrature_weights(grid);
  const MatrixXd x = design_matrix<double>({constant_image(grid, 1.0)}, bt, w);
  CHECK(x.rows() == 1);
  for (Index j = 0; j < 4; ++j) CHECK(x(0, j) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("disjoint indicator supports give a diagonal design") {
  const auto grid = GridSpec<double>::midpoints(20, 20);
  const auto spec = BasisSpec<double>::piecewise(2, 2);
  const auto bt = basis_matrix(spec, grid);
  const VectorXd w = quadrature_weights(grid);
  // the image equals basis function 2 evaluated on the grid
  ImageSample<double> img;
  img.values = bt.values.col(2);
  const MatrixXd x = design_matrix<double>({img}, bt, w);
  for (Index j = 0; j < 4; ++j)
    CHECK(x(0, j) == doctest::Approx(j == 2 ? 0.25 : 0.0).epsilon(1e-12));
}

TEST_CASE("quadrature design matches a refined grid for spline bases") {
  const auto spec = BasisSpec<double>::bspline(2, 2, 3, 3);
  const auto coarse = GridSpec<double>::midpoints(20, 20);
  const auto fine = GridSpec<double>::midpoints(40, 40);
  std::mt19937_64 rng(11);
  // a smooth random image evaluated on both grids through a fixed functional form
  auto smooth = [&](double t, double s) {
    return std::sin(3.0 * t) + std::cos(2.0 * s) + t * s;
  };
  ImageSample<double> img_c, img_f;
  img_c.values.resize(coarse.size());
  for (Index j = 0; j < coarse.size(); ++j) {
    const auto [t, s] = coarse.point(j);
    img_c.values[j] = smooth(t, s);
  }
  img_f.values.resize(fine.size());
  for (Index j = 0; j < fine.size(); ++j) {
    const auto [t, s] = fine.point(j);
    img_f.values[j] = smooth(t, s);
  }
  const MatrixXd xc = design_matrix<double>({img_c}, basis_matrix(spec, coarse), quadrature_weights(coarse));
  const MatrixXd xf = design_matrix<double>({img_f}, basis_matrix(spec, fine), quadrature_weights(fine));
  for (Index j = 0; j < xc.cols(); ++j)
    CHECK(xc(0, j) == doctest::Approx(xf(0, j)).epsilon(1e-2));
}

TEST_CASE("design is linear in the image argument") {
  const auto grid = GridSpec<double>::midpoints(10, 10);
  const auto bt = basis_matrix(BasisSpec<double>::bspline(2, 2, 2, 2), grid);
  const VectorXd w = quadrature_weights(grid);
  std::mt19937_64 rng(3);
  const auto x1 = random_image(grid, rng);
  const auto x2 = random_image(grid, rng);
  ImageSample<double> combo;
  combo.values = 2.5 * x1.values + x2.values;
  const MatrixXd m = design_matrix<double>({x1, x2, combo}, bt, w);
  CHECK((2.5 * m.row(0) + m.row(1) - m.row(2)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("centering removes means and records them") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd x(12, 7);
  VectorXd y(12);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng) + double(j);
    y[i] = normal(rng) + 3.0;
  }
  const auto ds = center(x, y);
  CHECK(ds.xc.colwise().mean().cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(ds.yc.mean()) <= 1e-10);
  CHECK(ds.d.minCoeff() > 0.0);
  CHECK(ds.d_max() == ds.d.maxCoeff());
  CHECK(ds.dropped_columns.empty());
  // reconstruction
  CHECK(((ds.xc.rowwise() + ds.x_means.transpose()) - x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("centering flags degenerate columns and constant responses") {
  MatrixXd x(3, 2);
  x << 1.0, 4.0, 1.0, 5.0, 1.0, 6.0;  // first column constant
  VectorXd y = VectorXd::Constant(3, 2.0);
  const auto ds = center(x, y);
  CHECK(ds.yc.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(ds.dropped_columns.size() == 1);
  CHECK(ds.dropped_columns[0] == 0);
  CHECK(ds.d[0] <= 1e-12);

  const MatrixXd same = MatrixXd::Ones(4, 3);
  const VectorXd ones4 = VectorXd::Ones(4);
  const auto ds2 = center(same, ones4);
  CHECK(ds2.xc.cwiseAbs().maxCoeff() == 0.0);
  CHECK(ds2.dropped_columns.size() == 3);

  const MatrixXd one_row = MatrixXd::Ones(1, 2);
  const VectorXd one = VectorXd::Ones(1);
  CHECK_THROWS_AS(center(one_row, one), std::invalid_argument);
}

TEST_CASE("aligned piecewise quadrature is exact for piecewise images") {
  // both the image and the basis are constant on the same 4x4 partition
  const auto grid = GridSpec<double>::midpoints(16, 16);
  const auto spec = BasisSpec<double>::piecewise(4, 4);
  const auto bt = basis_matrix(spec, grid);
  const VectorXd w = quadrature_weights(grid);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd levels(16);
  for (Index j = 0; j < 16; ++j) levels[j] = normal(rng);
  ImageSample<double> img;
  img.values = bt.values * levels;  // piecewise-constant image
  const MatrixXd x = design_matrix<double>({img}, bt, w);
  for (Index j = 0; j < 16; ++j)
    CHECK(x(0, j) == doctest::Approx(levels[j] / 16.0).epsilon(1e-12));
}
