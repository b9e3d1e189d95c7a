#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "pathfair/estimator.hpp"
#include "pathfair/graph.hpp"
#include "pathfair/sem.hpp"

namespace pathfair {

// ---------------------------------------------------------------------------
// Dataset

struct Dataset {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd X;  // raw (unstandardised) features, one-hot already applied
  Eigen::VectorXd y;  // binary labels
  int attribute_col = -1;
  long train_count = 0;
  std::vector<std::string> warnings;

  long rows() const { return X.rows(); }
  long test_count() const { return rows() - train_count; }
  Eigen::VectorXd attribute() const { return X.col(attribute_col); }

  Eigen::MatrixXd X_train() const { return X.topRows(train_count); }
  Eigen::MatrixXd X_test() const { return X.bottomRows(test_count()); }
  Eigen::VectorXd y_train() const { return y.head(train_count); }
  Eigen::VectorXd y_test() const { return y.tail(test_count()); }
  Eigen::VectorXd attr_train() const {
    return X.col(attribute_col).head(train_count);
  }
  Eigen::VectorXd attr_test() const {
    return X.col(attribute_col).tail(test_count());
  }
};

// Writes features + label to CSV (header row, full double precision so a
// write-read round trip is value-identical).
void write_dataset_csv(const Dataset& ds, const std::string& path,
                       const std::string& label_name = "Y");

// Reads a purely numeric CSV produced by write_dataset_csv (or shaped like
// one). The label column is named; the attribute column is named; the rest
// become features in file order.
Dataset read_numeric_csv(const std::string& path, const std::string& label,
                         const std::string& attribute, long train_count);

// ---------------------------------------------------------------------------
// Built-in generative presets

struct PresetBundle {
  std::string name;
  Sem sem;
  PathwaySet pathways;
  Recipe recipe;
  Dataset data;
};

// Known presets: "synth", "synth-additive", "synth-latent",
// "fig1b-illustrative". Default n = 6000 splits 5000/1000.
PresetBundle make_preset(const std::string& name, long n, std::uint64_t seed);
// The generative model and pathway selection alone (no data draw).
std::pair<Sem, PathwaySet> preset_model(const std::string& name);

// Default removal mask for a recipe: the attribute column plus the on-path
// mediator columns — exactly the inputs that can differ between the two
// potential-outcome worlds.
std::vector<int> default_remove_mask(const Recipe& r);

// True when the mask hides every input that can differ across the worlds
// (attribute + on-path mediators), which forces identical world inputs and
// therefore exactly-zero pathway statistics.
bool mask_hides_pathway_inputs(const Recipe& r, const std::vector<int>& mask);

// ---------------------------------------------------------------------------
// SEM (de)serialisation — the simulate command writes the generative model
// beside the dataset so later commands can recompute oracle statistics.

std::string serialize_sem(const Sem& sem, const PathwaySet& pi);
std::pair<Sem, PathwaySet> deserialize_sem(const std::string& json_text);
void save_sem(const Sem& sem, const PathwaySet& pi, const std::string& path);
std::pair<Sem, PathwaySet> load_sem(const std::string& path);

// ---------------------------------------------------------------------------
// Tabular (real-world) datasets
//
// Loaded from a user-supplied CSV plus a JSON sidecar describing the label,
// the protected attribute, categorical columns, dropped columns, the split,
// and the role blocks for the weight recipe. Categorical columns are
// one-hot encoded with categories discovered on the training split; test
// rows with unseen categories encode to all-zeros and produce a warning.

struct TabularLoad {
  Dataset data;
  Recipe recipe;
};

TabularLoad load_tabular_dataset(const std::string& config_path,
                                 const std::string& csv_override = "");

}  // namespace pathfair
