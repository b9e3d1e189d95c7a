#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pathfair/data.hpp"
#include "pathfair/estimator.hpp"
#include "pathfair/metrics.hpp"
#include "pathfair/propensity.hpp"
#include "pathfair/sem.hpp"
#include "pathfair/train.hpp"

namespace pathfair {

// ---------------------------------------------------------------------------
// Experiment specification (the train/sweep/eval config file)

struct ExperimentSpec {
  // Dataset source: exactly one of the three forms.
  std::string preset;              // built-in generative preset
  long n = 6000;                   // rows for preset generation
  std::string dataset_config;      // tabular JSON config path
  std::string dataset_csv;         // CSV override for the tabular config
  std::string csv_path;            // simulated-CSV form: data file ...
  std::string sem_path;            // ... plus its generative model
  long train_count = 0;            // split for the simulated-CSV form
                                   // (0 = rows minus rows/6)

  TrainConfig train;
  bool remove = false;                      // mask attribute + on-path mediators
  std::vector<std::string> remove_columns;  // explicit mask, by feature name
  std::string propensity_path;              // pre-fitted stages (else fit here)
  double ceiling = 0.1;                     // constraint ceiling for selection
  long long oracle_samples = 1000000;
  std::uint64_t seed = 1;
};

ExperimentSpec load_experiment_spec(const std::string& path);
ExperimentSpec parse_experiment_json(const std::string& json_text);

// ---------------------------------------------------------------------------
// Resolved context: data, recipe, nuisances, and (when generative) oracle.

struct ExperimentContext {
  Dataset data;
  Recipe recipe;
  std::optional<Sem> sem;
  std::optional<PathwaySet> pathways;
  PropensitySet propensities;          // fitted on the training split
  IpwWeights weights_train;
  IpwWeights weights_test;
  // Present when the feature family supports the partial-identification
  // penalty: exactly (attribute, proxy, mediator), with the proxy first in
  // the off-path block.
  std::optional<PartialIdTables> tables;
};

ExperimentContext resolve_experiment(const ExperimentSpec& spec);

// Resolves the mask columns requested by the spec (empty when none).
std::vector<int> resolve_mask(const ExperimentSpec& spec, const Recipe& r);

// ---------------------------------------------------------------------------
// Single training run + evaluation

struct RunArtifacts {
  TrainResult train;
  EvalStats stats;        // test split; oracle fields filled when available
  double constraint = 0;  // the regime's headline bound, used for selection
  bool zero_by_mask = false;

  bool has_latent = false;  // identification intervals, when tables exist
  PartialIdBounds latent;
  double latent_penalty = 0.0;  // u1 (1 - l0) + (1 - l1) u0
};

RunArtifacts run_training(const ExperimentContext& ctx,
                          const ExperimentSpec& spec);

// Evaluates an existing model under a context (test split + oracle).
RunArtifacts evaluate_in_context(const ExperimentContext& ctx,
                                 const ExperimentSpec& spec,
                                 const FittedModel& fm);

// ---------------------------------------------------------------------------
// Strength sweep

struct SweepPoint {
  double lambda = 0.0;
  RunArtifacts run;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::size_t selected = 0;
};

// Trains one model per grid value (same penalty, varying strength) and
// selects per the ceiling rule. `on_point` fires after each grid value so
// callers can persist partial results as they arrive.
SweepResult run_sweep(
    const ExperimentContext& ctx, const ExperimentSpec& spec,
    const std::vector<double>& grid,
    const std::function<void(const SweepPoint&)>& on_point = {});

// Evenly spaced grid: 0, step, 2*step, ..., up to `hi` inclusive.
std::vector<double> lambda_grid(double hi, double step);

}  // namespace pathfair
