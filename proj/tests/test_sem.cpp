#include <doctest.h>

#include <cmath>
#include <memory>

#include "pathfair/data.hpp"
#include "pathfair/errors.hpp"
#include "pathfair/model.hpp"
#include "pathfair/rng.hpp"
#include "pathfair/sem.hpp"

using namespace pathfair;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// A two-cause toy model: both A and an independent binary B feed Y.
Sem two_cause_sem(double b_rate) {
  CausalGraph g({"A", "B", "Y"}, {{"A", "Y"}, {"B", "Y"}}, "A", "Y");
  std::vector<ExprPtr> eq(3);
  std::vector<NoiseSpec> nz = {NoiseSpec::bernoulli(0.5),
                               NoiseSpec::bernoulli(b_rate),
                               NoiseSpec::uniform01()};
  eq[0] = expr::noise();
  eq[1] = expr::noise();
  eq[2] = expr::bernoulli_draw(expr::sigmoid(
      expr::sum({expr::var(0), expr::var(1), expr::constant(-1.0)})));
  return Sem(g, eq, nz);
}

FittedModel and_gate_model() {
  // c(A, B) = sigmoid(50 (A + B - 1.5)): the decision is A AND B.
  auto lr = std::make_unique<LogisticClassifier>(2);
  Eigen::VectorXd theta(3);
  theta << 50.0, 50.0, -75.0;
  lr->set_parameters(theta);
  return {Scaler::identity(2), std::move(lr)};
}

}  // namespace

TEST_CASE("noise specifications validate and sample within support") {
  CHECK_THROWS_AS(NoiseSpec::bernoulli(1.5), ConfigError);
  CHECK_THROWS_AS(NoiseSpec::gaussian(0.0, -1.0), ConfigError);
  CHECK_THROWS_AS(NoiseSpec::truncated_gaussian(0.0, 1.0, 2.0, 1.0),
                  ConfigError);

  Rng rng(42);
  auto tg = NoiseSpec::truncated_gaussian(1.5, 1.0, 0.1, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = tg.sample(rng);
    CHECK(v >= 0.1);
    CHECK(v <= 3.0);
  }
  auto be = NoiseSpec::bernoulli(0.6);
  int ones = 0;
  for (int i = 0; i < 4000; ++i) {
    const double v = be.sample(rng);
    CHECK((v == 0.0 || v == 1.0));
    ones += v == 1.0;
  }
  CHECK(ones > 2200);
  CHECK(ones < 2600);
  auto un = NoiseSpec::uniform01();
  for (int i = 0; i < 2000; ++i) {
    const double v = un.sample(rng);
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("structural models validate equations against the graph") {
  CausalGraph g({"A", "B", "Y"}, {{"A", "Y"}, {"B", "Y"}}, "A", "Y");
  std::vector<NoiseSpec> nz = {NoiseSpec::bernoulli(0.5),
                               NoiseSpec::bernoulli(0.5),
                               NoiseSpec::uniform01()};
  // B's equation may not read A (not a parent)
  std::vector<ExprPtr> bad(3);
  bad[0] = expr::noise();
  bad[1] = expr::var(0);
  bad[2] = expr::bernoulli_draw(expr::constant(0.5));
  CHECK_THROWS_AS(Sem(g, bad, nz), ConfigError);

  // a thresholded draw needs uniform noise
  std::vector<ExprPtr> eq(3);
  eq[0] = expr::noise();
  eq[1] = expr::noise();
  eq[2] = expr::bernoulli_draw(expr::constant(0.5));
  std::vector<NoiseSpec> nz2 = nz;
  nz2[2] = NoiseSpec::gaussian(0, 1);
  CHECK_THROWS_AS(Sem(g, eq, nz2), ConfigError);
  CHECK_NOTHROW(Sem(g, eq, nz));
}

TEST_CASE("the synthetic equations reproduce a worked row") {
  auto [sem, pi] = preset_model("synth");
  const CausalGraph& g = sem.graph();
  Eigen::MatrixXd noise(1, 5);
  noise.setZero();
  noise(0, g.index_of("A")) = 1.0;
  noise(0, g.index_of("Q")) = 2.3;
  noise(0, g.index_of("D")) = 2.0;
  noise(0, g.index_of("M")) = 1.0;
  noise(0, g.index_of("Y")) = 0.5;
  Eigen::MatrixXd v = sem.evaluate(noise);
  CHECK(v(0, g.index_of("A")) == 1.0);
  CHECK(v(0, g.index_of("Q")) == 2.0);                  // floor(2.3)
  CHECK(v(0, g.index_of("D")) == 3.0);                  // 1 + floor(0.5*2*2)
  CHECK(v(0, g.index_of("M")) == doctest::Approx(3.8)); // 3 + 0.4*2*1
  // u_Y = 0.5 < sigmoid(-10 + 5 + 2 + 3 + 3.8)
  CHECK(v(0, g.index_of("Y")) == 1.0);
}

TEST_CASE("noise sampling is seed-deterministic") {
  auto [sem, pi] = preset_model("synth");
  Eigen::MatrixXd a = sem.sample_noise(500, 11);
  Eigen::MatrixXd b = sem.sample_noise(500, 11);
  Eigen::MatrixXd c = sem.sample_noise(500, 12);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("interventions hold non-descendants fixed and recompute the rest") {
  auto [sem, pi] = preset_model("synth");
  const CausalGraph& g = sem.graph();
  Eigen::MatrixXd noise = sem.sample_noise(400, 3);
  Eigen::MatrixXd obs = sem.evaluate(noise);
  Eigen::MatrixXd v1 = sem.evaluate_intervened(noise, 1.0);
  CHECK((v1.col(g.index_of("A")).array() == 1.0).all());
  CHECK(v1.col(g.index_of("Q")) == obs.col(g.index_of("Q")));
  // D = A + floor(0.5 Q u): forcing A to 1 shifts D by exactly 1 - A_obs
  for (int i = 0; i < 400; ++i) {
    const double shift = 1.0 - obs(i, g.index_of("A"));
    CHECK(v1(i, g.index_of("D")) ==
          doctest::Approx(obs(i, g.index_of("D")) + shift));
  }
}

TEST_CASE("pathway worlds: baseline equals the zero intervention") {
  auto [sem, pi] = preset_model("synth");
  Eigen::MatrixXd noise = sem.sample_noise(300, 5);
  auto worlds = sem.evaluate_pathspecific(noise, pi);
  CHECK(worlds.v0 == sem.evaluate_intervened(noise, 0.0));
}

TEST_CASE("pathway worlds: selecting every path equals the one intervention") {
  auto [sem, ignored] = preset_model("synth");
  const CausalGraph& g = sem.graph();
  auto all = g.enumerate_paths(g.attribute(), g.outcome());
  PathwaySet every(g, all);
  Eigen::MatrixXd noise = sem.sample_noise(300, 6);
  auto worlds = sem.evaluate_pathspecific(noise, every);
  CHECK(worlds.v1pi == sem.evaluate_intervened(noise, 1.0));
}

TEST_CASE("pathway worlds: off-path parents keep their baseline values") {
  auto [sem, ignored] = preset_model("synth");
  const CausalGraph& g = sem.graph();
  auto pi = PathwaySet::from_names(g, {{"A", "Y"}});  // direct edge only
  Eigen::MatrixXd noise = sem.sample_noise(500, 9);
  auto w = sem.evaluate_pathspecific(noise, pi);
  const int A = g.index_of("A"), Q = g.index_of("Q"), D = g.index_of("D");
  const int M = g.index_of("M"), Y = g.index_of("Y");
  CHECK((w.v1pi.col(A).array() == 1.0).all());
  // mediators are untouched: the A->D and A->M edges are off-path
  CHECK(w.v1pi.col(D) == w.v0.col(D));
  CHECK(w.v1pi.col(M) == w.v0.col(M));
  CHECK(w.v1pi.col(Q) == w.v0.col(Q));
  // the outcome re-fires its draw with A=1 and everything else baseline
  for (int i = 0; i < 500; ++i) {
    const double p = sigmoid(-10.0 + 5.0 * 1.0 + w.v0(i, Q) + w.v0(i, D) +
                             w.v0(i, M));
    const double expect = noise(i, Y) < p ? 1.0 : 0.0;
    CHECK(w.v1pi(i, Y) == expect);
  }
}

TEST_CASE("feature layout skips latent nodes and the outcome") {
  auto [sem, pi] = preset_model("synth-latent");
  const CausalGraph& g = sem.graph();
  auto feats = feature_nodes(g);
  REQUIRE(feats.size() == 3);
  CHECK(g.name(feats[0]) == "A");
  CHECK(g.name(feats[1]) == "R");
  CHECK(g.name(feats[2]) == "M");
  CHECK(attribute_feature_column(g) == 0);
}

TEST_CASE("oracle statistics on an AND-gate model have closed forms") {
  Sem sem = two_cause_sem(0.3);
  auto pi = PathwaySet::from_names(sem.graph(), {{"A", "Y"}});
  FittedModel fm = and_gate_model();
  // sanity: the model really is an AND gate on its two inputs
  Eigen::MatrixXd corners(4, 2);
  corners << 0, 0, 0, 1, 1, 0, 1, 1;
  Eigen::VectorXd c = fm.score(corners);
  CHECK(c(0) < 1e-6);
  CHECK(c(1) < 1e-6);
  CHECK(c(2) < 1e-6);
  CHECK(c(3) > 1 - 1e-6);

  OracleOptions opt;
  opt.samples = 200000;
  opt.seed = 21;
  OracleStats os = oracle_statistics(sem, pi, fm, opt);
  // world 0 decides 0 always; world 1 decides B
  CHECK(os.p0_mean == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(os.p1_mean == doctest::Approx(0.3).epsilon(0.02));
  CHECK(os.flip_rate == doctest::Approx(0.3).epsilon(0.02));
  // subgroups are B = 0 (never flips) and B = 1 (always flips): the group
  // means are exactly 0 and 1, so their unweighted spread is exactly 1/2
  CHECK(os.subgroup_mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(os.subgroup_std == doctest::Approx(0.5).epsilon(1e-12));

  // identical options reproduce identical statistics
  OracleStats again = oracle_statistics(sem, pi, fm, opt);
  CHECK(os.flip_rate == again.flip_rate);
  CHECK(os.p1_mean == again.p1_mean);
  CHECK(os.subgroup_std == again.subgroup_std);

  // convenience wrappers agree with the combined call
  auto [p0, p1] = oracle_mean_marginals(sem, pi, fm, opt);
  CHECK(p0 == os.p0_mean);
  CHECK(p1 == os.p1_mean);
  CHECK(oracle_flip_probability(sem, pi, fm, opt) == os.flip_rate);
  auto [gm, gs] = oracle_conditional_mean_std(sem, pi, fm, opt);
  CHECK(gm == os.subgroup_mean);
  CHECK(gs == os.subgroup_std);
}

TEST_CASE("oracle estimates converge as the sample count grows") {
  Sem sem = two_cause_sem(0.3);
  auto pi = PathwaySet::from_names(sem.graph(), {{"A", "Y"}});
  FittedModel fm = and_gate_model();
  OracleOptions small, big;
  small.samples = 20000;
  small.seed = 77;
  big.samples = 80000;
  big.seed = 78;
  const double f1 = oracle_flip_probability(sem, pi, fm, small);
  const double f2 = oracle_flip_probability(sem, pi, fm, big);
  const double se1 = std::sqrt(f1 * (1 - f1) / small.samples);
  const double se2 = std::sqrt(f2 * (1 - f2) / big.samples);
  CHECK(std::abs(f1 - f2) < 3.0 * std::sqrt(se1 * se1 + se2 * se2) + 1e-9);
}

TEST_CASE("generative models survive a JSON round trip") {
  for (const char* name : {"synth", "synth-additive", "synth-latent",
                           "fig1b-illustrative"}) {
    auto [sem, pi] = preset_model(name);
    auto [back, pi2] = deserialize_sem(serialize_sem(sem, pi));
    const CausalGraph& g = sem.graph();
    const CausalGraph& h = back.graph();
    REQUIRE(g.names() == h.names());
    CHECK(g.attribute() == h.attribute());
    CHECK(g.outcome() == h.outcome());
    for (int v = 0; v < g.node_count(); ++v) {
      CHECK(g.is_latent(v) == h.is_latent(v));
      CHECK(g.parents(v) == h.parents(v));
    }
    CHECK(pi.paths() == pi2.paths());
    // equations evaluate identically on a shared noise draw
    Eigen::MatrixXd noise = sem.sample_noise(256, 4);
    CHECK(sem.evaluate(noise) == back.evaluate(noise));
    CHECK(back.sample_noise(64, 9) == sem.sample_noise(64, 9));
  }
}
