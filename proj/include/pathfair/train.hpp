#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathfair/estimator.hpp"
#include "pathfair/model.hpp"

namespace pathfair {

// ---------------------------------------------------------------------------
// Penalties
//
// Each penalty is a function of the model through the two estimated
// marginals (or, for the partial-identification variant, through the grid
// bounds). Values and derivatives are with respect to raw, unclamped
// marginal estimates so gradients stay alive at the boundary.

enum class PenaltyKind { None, PiuUb, Fio, PiuUbLatent };

PenaltyKind penalty_kind_from_string(const std::string& s);
std::string to_string(PenaltyKind k);

struct PenaltyValue {
  double value = 0.0;
  double dp0 = 0.0;  // d value / d p0
  double dp1 = 0.0;  // d value / d p1
};

// Half the marginal-only disagreement bound: p1 (1 - p0) + (1 - p1) p0.
PenaltyValue penalty_piu_ub(double p0, double p1);
// Absolute pathway-limited mean effect |p1 - p0| (zero subgradient at a tie).
PenaltyValue penalty_fio(double p0, double p1);
// Worst-case mismatch product over the identification intervals:
// u1 (1 - l0) + (1 - l1) u0.
double penalty_latent_value(const PartialIdBounds& b);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::string classifier = "mlp";  // "logreg" or "mlp"
  int epochs = 1000;
  int batch_size = 1000;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double lambda = 0.0;
  PenaltyKind penalty = PenaltyKind::None;
  // Feature columns hidden from the model. Only valid with penalty None:
  // feature removal and penalised training are alternative mitigations.
  std::vector<int> remove_mask;
  std::uint64_t seed = 1;
  int trace_every = 1;  // record a trace row every k epochs (and the last)
};

struct TraceRow {
  int epoch = 0;
  double loss = 0.0;      // mean cross-entropy over the epoch's batches
  double penalty = 0.0;   // full-data penalty term (lambda-scaled) at epoch end
  double p0 = 0.0;        // full-data raw marginal estimates
  double p1 = 0.0;
  double wall_ms = 0.0;   // cumulative wall time
};

struct TrainResult {
  FittedModel model;
  std::vector<TraceRow> trace;
  bool aborted = false;  // non-finite objective; model is the last good state
  std::vector<std::string> warnings;
};

// Trains a classifier on raw features (standardisation is fitted here and
// travels with the model). `weights` are required for the PiuUb and Fio
// penalties and, when present, also feed the trace marginals; `tables` are
// required for PiuUbLatent. Batches missing one attribute stratum are
// skipped with a warning when a marginal-based penalty is active.
TrainResult train_classifier(const Eigen::MatrixXd& X_raw,
                             const Eigen::VectorXd& y,
                             const Eigen::VectorXd& attribute,
                             const TrainConfig& cfg,
                             const IpwWeights* weights = nullptr,
                             const PartialIdTables* tables = nullptr);

// Mean binary cross-entropy of scores against 0/1 labels.
double cross_entropy(const Eigen::VectorXd& scores, const Eigen::VectorXd& y);

// Full-data penalty of a fitted model under the given configuration.
double full_data_penalty(const FittedModel& fm, const Eigen::MatrixXd& X_raw,
                         PenaltyKind kind, const IpwWeights* weights,
                         const PartialIdTables* tables);

// ---------------------------------------------------------------------------
// Regularisation-strength selection
//
// Given one trained model per candidate strength, pick the largest test
// accuracy among candidates whose constraint value is at or below the
// ceiling; if none qualifies, fall back to the smallest constraint value
// (ties broken by higher accuracy, then smaller lambda).

struct LambdaPoint {
  double lambda = 0.0;
  double test_accuracy = 0.0;
  double constraint = 0.0;  // the regime's own headline bound at this lambda
};

std::size_t select_lambda(const std::vector<LambdaPoint>& points,
                          double ceiling = 0.1);

}  // namespace pathfair
