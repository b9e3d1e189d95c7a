#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>

#include "pathfair/errors.hpp"
#include "pathfair/model.hpp"

using namespace pathfair;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = n(rng);
  return X;
}

// Central finite differences of phi(theta) = sum_i g_i c_i(theta).
double max_gradient_mismatch(Classifier& m, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& g, double h = 1e-5) {
  const Eigen::VectorXd grad = m.backward(X, g);
  Eigen::VectorXd theta = m.parameters();
  REQUIRE(grad.size() == theta.size());
  double worst = 0.0;
  for (int k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    m.set_parameters(tp);
    const double fp = g.dot(m.forward(X));
    m.set_parameters(tm);
    const double fm = g.dot(m.forward(X));
    m.set_parameters(theta);
    const double fd = (fp - fm) / (2 * h);
    const double rel =
        std::abs(grad(k) - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

TEST_CASE("logistic scores have the closed form and start at one half") {
  LogisticClassifier lr(3);
  Eigen::MatrixXd X = random_matrix(6, 3, 1);
  CHECK((lr.forward(X).array() == 0.5).all());

  Eigen::VectorXd theta(4);
  theta << 0.5, -1.0, 2.0, 0.25;
  lr.set_parameters(theta);
  Eigen::VectorXd c = lr.forward(X);
  for (int i = 0; i < X.rows(); ++i) {
    const double z = 0.5 * X(i, 0) - 1.0 * X(i, 1) + 2.0 * X(i, 2) + 0.25;
    CHECK(c(i) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lr.set_parameters(Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("perceptron initialisation is seeded and bounded by fan-in") {
  MlpClassifier a(4, 99), b(4, 99), c(4, 100);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != c.parameters());
  CHECK(a.parameter_count() == (100 * 4 + 100) + (50 * 100 + 50) + (2 * 50 + 2));
  // first-layer weights live inside (-1/2, 1/2) for fan-in 4
  Eigen::VectorXd theta = a.parameters();
  for (int k = 0; k < 100 * 4; ++k) {
    CHECK(std::abs(theta(k)) < 0.5);
  }
  Eigen::MatrixXd X = random_matrix(8, 4, 2);
  Eigen::VectorXd scores = a.forward(X);
  CHECK((scores.array() > 0.0).all());
  CHECK((scores.array() < 1.0).all());
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);

  SUBCASE("logistic") {
    LogisticClassifier lr(3);
    Eigen::VectorXd theta(4);
    for (int k = 0; k < 4; ++k) theta(k) = 0.3 * n(rng);
    lr.set_parameters(theta);
    Eigen::MatrixXd X = random_matrix(7, 3, 3);
    Eigen::VectorXd g(7);
    for (int i = 0; i < 7; ++i) g(i) = n(rng);
    CHECK(max_gradient_mismatch(lr, X, g) < 1e-6);
  }

  SUBCASE("perceptron") {
    MlpClassifier mlp(4, 11);
    Eigen::MatrixXd X = random_matrix(5, 4, 4);
    Eigen::VectorXd g(5);
    for (int i = 0; i < 5; ++i) g(i) = n(rng);
    CHECK(max_gradient_mismatch(mlp, X, g) < 1e-5);
  }

  SUBCASE("masked perceptron") {
    auto inner = std::make_unique<MlpClassifier>(4, 12);
    MaskedClassifier m(std::move(inner), {0, 2});
    Eigen::MatrixXd X = random_matrix(5, 4, 5);
    Eigen::VectorXd g(5);
    for (int i = 0; i < 5; ++i) g(i) = n(rng);
    CHECK(max_gradient_mismatch(m, X, g) < 1e-5);
  }
}

TEST_CASE("masking projects the named columns to zero") {
  auto inner = std::make_unique<LogisticClassifier>(3);
  Eigen::VectorXd theta(4);
  theta << 1.0, 2.0, 3.0, 0.0;
  inner->set_parameters(theta);
  LogisticClassifier bare(3);
  bare.set_parameters(theta);

  MaskedClassifier m(std::move(inner), {1});
  Eigen::MatrixXd X = random_matrix(10, 3, 6);
  Eigen::MatrixXd Xz = X;
  Xz.col(1).setZero();
  CHECK(m.forward(X) == bare.forward(Xz));
  CHECK(m.kind() == "masked+logreg");
  CHECK_THROWS_AS(
      MaskedClassifier(std::make_unique<LogisticClassifier>(3), {3}),
      ConfigError);
}

TEST_CASE("the scaler standardises columns and tolerates constants") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 5, 2, 5, 3, 5, 4, 5;
  Scaler s = Scaler::fit(X);
  CHECK(s.mean(0) == doctest::Approx(2.5));
  CHECK(s.mean(1) == doctest::Approx(5.0));
  // population standard deviation of {1,2,3,4}
  CHECK(s.scale(0) == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.scale(1) == doctest::Approx(1.0));  // constant column passes through
  Eigen::MatrixXd Z = s.apply(X);
  CHECK(Z.col(0).mean() == doctest::Approx(0.0));
  CHECK((Z.col(1).array() == 0.0).all());

  Scaler id = Scaler::identity(2);
  CHECK(id.apply(X) == X);
}

TEST_CASE("fitted models apply their scaler before scoring") {
  auto lr = std::make_unique<LogisticClassifier>(2);
  Eigen::VectorXd theta(3);
  theta << 1.0, -1.0, 0.5;
  lr->set_parameters(theta);
  Eigen::MatrixXd X = random_matrix(6, 2, 8).array() * 3.0 + 1.0;
  Scaler s = Scaler::fit(X);
  LogisticClassifier bare(2);
  bare.set_parameters(theta);
  FittedModel fm{s, std::move(lr)};
  CHECK(fm.score(X) == bare.forward(s.apply(X)));
}

TEST_CASE("checkpoints survive a serialisation round trip") {
  Eigen::MatrixXd X = random_matrix(9, 4, 10);

  SUBCASE("logistic") {
    auto lr = std::make_unique<LogisticClassifier>(4);
    Eigen::VectorXd theta(5);
    theta << 0.1, -0.2, 0.3, -0.4, 0.5;
    lr->set_parameters(theta);
    FittedModel fm{Scaler::fit(X), std::move(lr)};
    FittedModel back = deserialize_model(serialize_model(fm));
    CHECK(back.model->kind() == "logreg");
    CHECK(back.model->parameters() == fm.model->parameters());
    CHECK(back.score(X) == fm.score(X));
  }

  SUBCASE("perceptron") {
    FittedModel fm{Scaler::fit(X), std::make_unique<MlpClassifier>(4, 3)};
    FittedModel back = deserialize_model(serialize_model(fm));
    CHECK(back.model->kind() == "mlp");
    CHECK(back.model->parameters() == fm.model->parameters());
    CHECK(back.score(X) == fm.score(X));
  }

  SUBCASE("masked perceptron through a file") {
    FittedModel fm{Scaler::fit(X),
                   std::make_unique<MaskedClassifier>(
                       std::make_unique<MlpClassifier>(4, 5),
                       std::vector<int>{0, 3})};
    const std::string path =
        (std::filesystem::temp_directory_path() / "ckpt_roundtrip.json")
            .string();
    save_model(fm, path);
    FittedModel back = load_model(path);
    std::remove(path.c_str());
    CHECK(back.model->kind() == "masked+mlp");
    const auto* mc = dynamic_cast<const MaskedClassifier*>(back.model.get());
    REQUIRE(mc != nullptr);
    CHECK(mc->masked_columns() == std::vector<int>{0, 3});
    CHECK(back.score(X) == fm.score(X));
  }
}
