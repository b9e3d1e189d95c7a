#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "pathfair/errors.hpp"
#include "pathfair/propensity.hpp"

using namespace pathfair;

namespace {

struct LogitDraw {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

LogitDraw draw_logistic(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LogitDraw d;
  d.X.resize(n, 2);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = g(rng);
    d.X(i, 1) = g(rng);
    const double z = 0.5 + d.X(i, 0) - 2.0 * d.X(i, 1);
    d.y(i) = u(rng) < 1.0 / (1.0 + std::exp(-z)) ? 1.0 : 0.0;
  }
  return d;
}

}  // namespace

TEST_CASE("maximum likelihood recovers the generating coefficients") {
  LogitDraw d = draw_logistic(20000, 5);
  LogisticPropensity m = LogisticPropensity::fit(d.X, d.y);
  REQUIRE(m.coefficients().size() == 3);
  CHECK(m.coefficients()(0) == doctest::Approx(1.0).epsilon(0.08));
  CHECK(m.coefficients()(1) == doctest::Approx(-2.0).epsilon(0.08));
  CHECK(m.coefficients()(2) == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("an intercept-only model predicts the base rate") {
  Eigen::MatrixXd X(6, 0);
  Eigen::VectorXd y(6);
  y << 1, 1, 1, 1, 0, 0;
  LogisticPropensity m = LogisticPropensity::fit(X, y);
  Eigen::VectorXd p = m.probability(X);
  for (int i = 0; i < 6; ++i) {
    CHECK(p(i) == doctest::Approx(4.0 / 6.0).epsilon(1e-6));
  }
}

TEST_CASE("separable data stays inside the clipping band") {
  Eigen::MatrixXd X(8, 1);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    y(i) = i < 4 ? 0.0 : 1.0;
    X(i, 0) = y(i) * 2.0 - 1.0;
  }
  LogisticPropensity m = LogisticPropensity::fit(X, y);
  Eigen::VectorXd p = m.probability(X, 1e-3);
  CHECK((p.array() >= 1e-3).all());
  CHECK((p.array() <= 1.0 - 1e-3).all());
  // the direction is still right
  CHECK(p(0) < 0.5);
  CHECK(p(7) > 0.5);
}

TEST_CASE("degenerate targets clip instead of exploding") {
  Eigen::MatrixXd X(5, 0);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
  LogisticPropensity m = LogisticPropensity::fit(X, ones);
  Eigen::VectorXd p = m.probability(X, 1e-3);
  CHECK((p.array() <= 1.0 - 1e-3).all());
  CHECK((p.array() >= 0.5).all());
}

TEST_CASE("stages select their conditioning columns from the raw matrix") {
  LogitDraw d = draw_logistic(4000, 6);
  // widen with a junk column so selection matters
  Eigen::MatrixXd wide(d.X.rows(), 3);
  wide.col(0) = Eigen::VectorXd::Constant(d.X.rows(), 9.0);
  wide.col(1) = d.X.col(0);
  wide.col(2) = d.X.col(1);
  PropensityStage stage;
  stage.columns = {1, 2};
  stage.column_names = {"x1", "x2"};
  stage.model = LogisticPropensity::fit(d.X, d.y);
  CHECK(stage.probability(wide) == stage.model.probability(d.X));
}

TEST_CASE("the three stages condition on cumulative blocks") {
  LogitDraw d = draw_logistic(3000, 7);
  Eigen::MatrixXd X(d.X.rows(), 4);
  X.col(0) = d.y;          // attribute column (index 0)
  X.col(1) = d.X.col(0);   // baseline covariate
  X.col(2) = d.X.col(1);   // on-path mediator
  X.col(3) = d.X.col(0) + d.X.col(1);  // off-path mediator
  PropensitySet ps = fit_propensities(X, d.y, {1}, {2}, {3},
                                      {"A", "C", "MP", "MB"});
  CHECK(ps.base.columns == std::vector<int>{1});
  CHECK(ps.mid.columns == std::vector<int>{1, 2});
  CHECK(ps.full.columns == std::vector<int>{1, 2, 3});
  CHECK(ps.base.column_names == std::vector<std::string>{"C"});
  CHECK(ps.full.column_names == std::vector<std::string>{"C", "MP", "MB"});
  // fuller conditioning cannot fit worse in likelihood terms; spot-check
  // that predictions differ between stages (the blocks carry signal)
  CHECK(ps.base.probability(X) != ps.full.probability(X));
}

TEST_CASE("propensity artifacts survive a file round trip") {
  LogitDraw d = draw_logistic(2500, 8);
  Eigen::MatrixXd X(d.X.rows(), 3);
  X.col(0) = d.y;
  X.col(1) = d.X.col(0);
  X.col(2) = d.X.col(1);
  PropensitySet ps = fit_propensities(X, d.y, {1}, {}, {2}, {"A", "C", "MB"});
  const std::string path =
      (std::filesystem::temp_directory_path() / "prop_roundtrip.json").string();
  save_propensities(ps, path);
  PropensitySet back = load_propensities(path);
  std::remove(path.c_str());
  CHECK(back.base.columns == ps.base.columns);
  CHECK(back.mid.columns == ps.mid.columns);
  CHECK(back.full.columns == ps.full.columns);
  CHECK(back.full.column_names == ps.full.column_names);
  CHECK(back.base.model.coefficients() == ps.base.model.coefficients());
  CHECK(back.full.probability(X) == ps.full.probability(X));
}
