#pragma once

#include <Eigen/Dense>

#include "pathfair/estimator.hpp"
#include "pathfair/model.hpp"

namespace pathfair {

// Decision accuracy (threshold 0.5) as a fraction of the evaluation rows.
double accuracy(const FittedModel& fm, const Eigen::MatrixXd& X_raw,
                const Eigen::VectorXd& y);

// Estimated fairness statistics of a fitted model on an evaluation split:
// the reweighted marginals, their difference, and the marginal-only
// disagreement bound. Oracle fields are filled by simulation-backed
// callers when a generative model is available.
struct EvalStats {
  double accuracy = 0.0;
  double p0_raw = 0.0, p1_raw = 0.0;
  double p0 = 0.0, p1 = 0.0;       // clamped to [0, 1]
  double effect = 0.0;             // p1 - p0
  double disagreement_bound = 0.0; // 2 [ p1 (1-p0) + (1-p1) p0 ]

  bool has_oracle = false;
  double oracle_p0 = 0.0, oracle_p1 = 0.0;
  double oracle_flip = 0.0;          // P(decisions differ across worlds)
  double oracle_subgroup_std = 0.0;  // spread of per-subgroup flip rates
};

// `pathway_inputs_masked`: the caller asserts that the model's feature
// mask hides the attribute and every column that can differ between the
// two potential-outcome worlds, making the worlds' inputs literally
// identical. The pathway statistics are then exactly zero by construction
// and are reported as such rather than through finite-sample reweighting.
EvalStats evaluate_model(const FittedModel& fm, const Eigen::MatrixXd& X_raw,
                         const Eigen::VectorXd& y, const IpwWeights& w,
                         bool pathway_inputs_masked = false);

// Exact (Clopper-Pearson style) interval for a true error rate given k
// errors in n held-out decisions, each endpoint at level delta:
//   lower: the rate with P(X <= k) = 1 - delta   (0 when k = 0)
//   upper: the rate with P(X <= k) = delta       (1 when k = n)
struct TestSetBound {
  double lower = 0.0;
  double upper = 1.0;
};
TestSetBound test_set_bound(int k, int n, double delta = 0.05);

}  // namespace pathfair
