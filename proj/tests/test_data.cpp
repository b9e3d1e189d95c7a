#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <string>
#include <vector>

#include "pathfair/data.hpp"
#include "pathfair/errors.hpp"
#include "pathfair/estimator.hpp"

using namespace pathfair;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pathfair-data-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

}  // namespace

TEST_CASE("numeric CSV files survive a write-read round trip exactly") {
  TempDir tmp;
  const PresetBundle bundle = make_preset("synth", 200, 31);
  const std::string path = tmp.file("synth.csv");
  write_dataset_csv(bundle.data, path, "Y");

  const Dataset back = read_numeric_csv(path, "Y", "A", 100);
  CHECK(back.feature_names == bundle.data.feature_names);
  CHECK(back.attribute_col == bundle.data.attribute_col);
  CHECK(back.train_count == 100);
  REQUIRE(back.X.rows() == bundle.data.X.rows());
  REQUIRE(back.X.cols() == bundle.data.X.cols());
  CHECK((back.X - bundle.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.y - bundle.data.y).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(read_numeric_csv(path, "nope", "A", 100), ConfigError);
  CHECK_THROWS_AS(read_numeric_csv(path, "Y", "nope", 100), ConfigError);
  CHECK_THROWS_AS(read_numeric_csv(path, "Y", "A", 200), ConfigError);
  CHECK_THROWS_AS(read_numeric_csv(path, "Y", "A", 0), ConfigError);
}

TEST_CASE("quoted headers and malformed cells are handled") {
  TempDir tmp;
  const std::string path = tmp.file("quoted.csv");
  write_text(path, "a,\"b,c\",A,Y\n1.5,2,1,0\n2.5,3,0,1\n");
  const Dataset ds = read_numeric_csv(path, "Y", "A", 1);
  REQUIRE(ds.feature_names.size() == 3);
  CHECK(ds.feature_names[1] == "b,c");
  CHECK(ds.attribute_col == 2);
  CHECK(ds.X(0, 0) == 1.5);

  const std::string ragged = tmp.file("ragged.csv");
  write_text(ragged, "a,A,Y\n1,0,1\n2,1\n3,1,0\n");
  CHECK_THROWS_AS(read_numeric_csv(ragged, "Y", "A", 1), ConfigError);

  const std::string junk = tmp.file("junk.csv");
  write_text(junk, "a,A,Y\n1,0,1\nxyz,1,0\n3,1,0\n");
  CHECK_THROWS_WITH_AS(read_numeric_csv(junk, "Y", "A", 1),
                       doctest::Contains("xyz"), ConfigError);
}

TEST_CASE("presets produce the documented columns and split") {
  for (const std::string name :
       {"synth", "synth-additive", "synth-latent", "fig1b-illustrative"}) {
    const PresetBundle b = make_preset(name, 600, 1);
    CHECK(b.data.rows() == 600);
    CHECK(b.data.train_count == 500);  // n - n/6
    CHECK(b.data.test_count() == 100);
    CHECK(b.data.attribute_col == 0);
    CHECK(b.data.X.allFinite());
    for (long i = 0; i < b.data.rows(); ++i) {
      CHECK((b.data.y(i) == 0.0 || b.data.y(i) == 1.0));
      const double a = b.data.X(i, b.data.attribute_col);
      CHECK((a == 0.0 || a == 1.0));
    }
  }

  const PresetBundle synth = make_preset("synth", 120, 2);
  CHECK(synth.data.feature_names ==
        std::vector<std::string>{"A", "Q", "D", "M"});

  // The latent confounder is not observable: it never becomes a feature.
  const PresetBundle latent = make_preset("synth-latent", 120, 2);
  CHECK(latent.data.feature_names == std::vector<std::string>{"A", "R", "M"});
  for (long i = 0; i < latent.data.rows(); ++i) {
    const double m = latent.data.X(i, 2);
    CHECK((m == 0.0 || m == 1.0));
    const double r = latent.data.X(i, 1);
    CHECK(r == std::floor(r));
  }

  CHECK_THROWS_AS(make_preset("synth", 11, 1), ConfigError);
  CHECK_THROWS_AS(make_preset("mystery", 600, 1), ConfigError);

  const PresetBundle again = make_preset("synth", 120, 2);
  CHECK((again.data.X - synth.data.X).cwiseAbs().maxCoeff() == 0.0);
  const PresetBundle other = make_preset("synth", 120, 3);
  CHECK((other.data.X - synth.data.X).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("the default mask hides exactly the divergent inputs") {
  const PresetBundle synth = make_preset("synth", 120, 1);
  CHECK(default_remove_mask(synth.recipe) == std::vector<int>{0, 2});
  CHECK(mask_hides_pathway_inputs(synth.recipe, {0, 2}));
  CHECK(mask_hides_pathway_inputs(synth.recipe, {0, 2, 3}));
  CHECK_FALSE(mask_hides_pathway_inputs(synth.recipe, {0}));
  CHECK_FALSE(mask_hides_pathway_inputs(synth.recipe, {2}));
  CHECK_FALSE(mask_hides_pathway_inputs(synth.recipe, {}));

  const PresetBundle latent = make_preset("synth-latent", 120, 1);
  CHECK(default_remove_mask(latent.recipe) == std::vector<int>{0});
  CHECK(mask_hides_pathway_inputs(latent.recipe, {0}));
}

TEST_CASE("tabular loading encodes categories from the training split") {
  TempDir tmp;
  const std::string csv = tmp.file("credit.csv");
  write_text(csv,
             "sex,age,job,amount,risk\n"
             "male,30,skilled,1000,good\n"
             "female,25,unskilled,2000,bad\n"
             "male,40,skilled,1500,good\n"
             "female,35,manager,3000,good\n"
             "male,28,apprentice,1200,bad\n"
             "female,45,manager,2500,good\n");
  const std::string cfg = tmp.file("credit.json");
  write_text(cfg, std::string("{\n"
                              "  \"csv\": \"") +
                      csv +
                      "\",\n"
                      "  \"label\": \"risk\",\n"
                      "  \"positive_label\": \"good\",\n"
                      "  \"attribute\": \"sex\",\n"
                      "  \"attribute_positive\": \"female\",\n"
                      "  \"categorical\": [\"job\"],\n"
                      "  \"train_count\": 4,\n"
                      "  \"roles\": {\n"
                      "    \"c\": [\"age\"],\n"
                      "    \"mpi\": [\"job\"],\n"
                      "    \"mbar\": [\"amount\"]\n"
                      "  }\n"
                      "}\n");

  const TabularLoad loaded = load_tabular_dataset(cfg);
  const Dataset& ds = loaded.data;
  CHECK(ds.feature_names ==
        std::vector<std::string>{"sex", "age", "job=manager", "job=skilled",
                                 "job=unskilled", "amount"});
  CHECK(ds.attribute_col == 0);
  CHECK(ds.train_count == 4);

  Eigen::VectorXd y_expect(6), a_expect(6);
  y_expect << 1, 0, 1, 1, 0, 1;
  a_expect << 0, 1, 0, 1, 0, 1;
  CHECK((ds.y - y_expect).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ds.attribute() - a_expect).cwiseAbs().maxCoeff() == 0.0);

  CHECK(ds.X(0, 3) == 1.0);  // skilled
  CHECK(ds.X(3, 2) == 1.0);  // manager
  // The unseen category encodes as all-zeros and is reported once.
  CHECK(ds.X(4, 2) == 0.0);
  CHECK(ds.X(4, 3) == 0.0);
  CHECK(ds.X(4, 4) == 0.0);
  REQUIRE(ds.warnings.size() == 1);
  CHECK(ds.warnings[0].find("unseen category") != std::string::npos);

  // Role blocks expand through the one-hot encoding.
  CHECK(loaded.recipe.attribute_col == 0);
  CHECK(loaded.recipe.c_cols == std::vector<int>{1});
  CHECK(loaded.recipe.mpi_cols == std::vector<int>{2, 3, 4});
  CHECK(loaded.recipe.mbar_cols == std::vector<int>{5});
}

TEST_CASE("tabular loading rejects inconsistent configurations") {
  TempDir tmp;
  const std::string csv = tmp.file("tiny.csv");
  write_text(csv,
             "sex,age,risk\n"
             "male,30,1\n"
             "female,25,0\n"
             "male,40,1\n");

  const auto config_with = [&](const std::string& body) {
    const std::string path = tmp.file("cfg.json");
    write_text(path, body);
    return path;
  };

  // A role naming an unknown column.
  CHECK_THROWS_AS(
      load_tabular_dataset(config_with(
          std::string("{\"csv\": \"") + csv +
          "\", \"label\": \"risk\", \"attribute\": \"sex\", "
          "\"attribute_positive\": \"female\", \"train_count\": 2, "
          "\"roles\": {\"c\": [\"height\"]}}")),
      ConfigError);

  // A split that leaves no test rows.
  CHECK_THROWS_AS(
      load_tabular_dataset(config_with(
          std::string("{\"csv\": \"") + csv +
          "\", \"label\": \"risk\", \"attribute\": \"sex\", "
          "\"attribute_positive\": \"female\", \"train_count\": 3, "
          "\"roles\": {}}")),
      ConfigError);

  // A non-binary numeric attribute without an encoding rule.
  const std::string bad_attr = tmp.file("badattr.csv");
  write_text(bad_attr,
             "sex,age,risk\n2,30,1\n0,25,0\n1,40,1\n0,33,0\n");
  CHECK_THROWS_AS(
      load_tabular_dataset(config_with(
          std::string("{\"csv\": \"") + bad_attr +
          "\", \"label\": \"risk\", \"attribute\": \"sex\", "
          "\"train_count\": 2, \"roles\": {}}")),
      ConfigError);

  // A missing config file is a validation error: the user named a path
  // that does not exist.
  CHECK_THROWS_AS(load_tabular_dataset(tmp.file("absent.json")), ConfigError);
}

TEST_CASE("generative models survive the file round trip") {
  TempDir tmp;
  const auto [sem, pi] = preset_model("synth");
  const std::string path = tmp.file("model.sem.json");
  save_sem(sem, pi, path);
  const auto [back, back_pi] = load_sem(path);

  CHECK(back.graph().node_count() == sem.graph().node_count());
  REQUIRE(back_pi.paths().size() == pi.paths().size());
  const Eigen::MatrixXd U = sem.sample_noise(64, 99);
  CHECK((back.evaluate(U) - sem.evaluate(U)).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(load_sem(tmp.file("absent.sem.json")), ConfigError);
}
