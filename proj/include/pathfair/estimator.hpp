#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pathfair/graph.hpp"
#include "pathfair/model.hpp"
#include "pathfair/propensity.hpp"

namespace pathfair {

// ---------------------------------------------------------------------------
// Estimation recipes
//
// A recipe names the three conditioning blocks behind the reweighting
// template: baseline covariates C (pre-attribute), on-path mediators (the
// intermediate nodes of the selected pathways), and off-path mediators
// (the remaining attribute-to-outcome intermediates). Columns index the
// dataset's feature matrix.

struct Recipe {
  std::vector<std::string> feature_names;
  std::vector<int> c_cols;
  std::vector<int> mpi_cols;
  std::vector<int> mbar_cols;
  int attribute_col = -1;
};

// Derives the recipe from a causal graph and pathway selection. Rejects
// selections outside the supported family: a recanting witness, a selected
// path longer than one intermediate hop, more than one on-path mediator,
// or a latent node serving as any attribute-to-outcome mediator. Latent
// nodes that merely confound observables are allowed — they are silently
// absent from the conditioning sets, which is exactly the hazard the
// partial-identification penalty exists for.
Recipe derive_recipe(const CausalGraph& g, const PathwaySet& pi);

// Builds a recipe from explicit role assignments (for datasets without a
// wired-in structural model). Every named column must exist.
Recipe recipe_from_roles(const std::vector<std::string>& feature_names,
                         const std::string& attribute,
                         const std::vector<std::string>& c_names,
                         const std::vector<std::string>& mpi_names,
                         const std::vector<std::string>& mbar_names);

// ---------------------------------------------------------------------------
// Inverse-probability weights
//
// w0 targets E[c(X) | attribute <- 0]:   I(A=0) / P(A=0 | C)
// w1 targets the pathway-limited mean under attribute <- 1:
//   I(A=1) * P(A=1|C,Mpi) P(A=0|C,Mpi,Mbar)
//          / [ P(A=1|C) P(A=0|C,Mpi) P(A=1|C,Mpi,Mbar) ]
// Empty blocks reduce stages to intercept-only models; the template needs
// no special-casing.

struct IpwWeights {
  Eigen::VectorXd w0;  // zero on rows with A=1
  Eigen::VectorXd w1;  // zero on rows with A=0
};

IpwWeights compute_ipw_weights(const PropensitySet& ps,
                               const Eigen::MatrixXd& X_raw,
                               const Eigen::VectorXd& attribute,
                               double clip = 1e-3);

// Horvitz-Thompson marginals of a model's scores under the two weights.
// Raw values can leave [0, 1]; clamped copies are for reporting and for
// derived statistics.
struct MarginalEstimate {
  double p0_raw = 0.0, p1_raw = 0.0;
  double p0 = 0.0, p1 = 0.0;  // clamped to [0, 1]
};

MarginalEstimate estimate_marginals(const FittedModel& fm,
                                    const Eigen::MatrixXd& X_raw,
                                    const IpwWeights& w);

// ---------------------------------------------------------------------------
// Bound algebra

// Upper bound on the probability that the two potential decisions differ,
// in terms of the marginals alone: 2 [ p1 (1 - p0) + (1 - p1) p0 ].
double piu_upper_bound(double p0, double p1);

// The exact attainable range of that disagreement probability over all
// joint couplings with the given marginals.
struct FeasibleRange {
  double lower = 0.0;
  double upper = 0.0;
};
FeasibleRange feasible_range(double p0, double p1);

// ---------------------------------------------------------------------------
// Partial identification under a latent attribute-outcome confounder
//
// For the family with features exactly (attribute, one continuous proxy R,
// one discrete mediator M): Frechet-style bounds on the cross-world mean
// score, built from a fixed evaluation grid. R is summarised by
// equal-frequency bins (bin means as representatives, per-stratum bin
// frequencies as probabilities); M keeps its observed levels with the
// baseline-stratum level frequencies.

struct PartialIdTables {
  int attribute_col = -1;
  int r_col = -1;
  int m_col = -1;
  int feature_dim = 0;
  std::vector<double> m_levels;
  Eigen::VectorXd p_m_a0;             // P(M = m | A = 0), per level
  Eigen::VectorXd r_reps;             // bin representatives
  Eigen::VectorXd p_r_a0, p_r_a1;     // per-stratum bin frequencies

  // Rows ordered m-major: (m0,r0..r9, m1,r0..r9, ...); attribute column
  // fixed to `a`, all other feature columns zero (the family has none).
  Eigen::MatrixXd grid(double a) const;
  int grid_rows() const {
    return static_cast<int>(m_levels.size()) * static_cast<int>(r_reps.size());
  }
};

PartialIdTables build_partial_id_tables(const Eigen::MatrixXd& X_raw,
                                        const Eigen::VectorXd& attribute,
                                        int attribute_col, int r_col, int m_col,
                                        int bins = 10);

struct PartialIdBounds {
  double l0 = 0.0, u0 = 1.0;  // baseline-world mean score
  double l1 = 0.0, u1 = 1.0;  // pathway-world mean score
};

// Bounds plus their derivatives with respect to the grid scores, for use
// inside gradient-based training. At ties the constant branch is active,
// so the derivative is zero there.
struct PartialIdDerivs {
  PartialIdBounds bounds;
  Eigen::VectorXd dl0, du0;  // w.r.t. scores on grid(0)
  Eigen::VectorXd dl1, du1;  // w.r.t. scores on grid(1)
};

PartialIdDerivs partial_id_from_scores(const Eigen::VectorXd& scores_a0,
                                       const Eigen::VectorXd& scores_a1,
                                       const PartialIdTables& tables);

PartialIdBounds partial_id_bounds(const FittedModel& fm,
                                  const PartialIdTables& tables);

}  // namespace pathfair
