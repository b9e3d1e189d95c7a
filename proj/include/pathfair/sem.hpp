#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pathfair/graph.hpp"
#include "pathfair/model.hpp"

namespace pathfair {

// ---------------------------------------------------------------------------
// Noise

struct NoiseSpec {
  enum class Kind { Bernoulli, Gaussian, TruncatedGaussian, Uniform };
  Kind kind = Kind::Uniform;
  // Bernoulli: a = success probability.
  // Gaussian: a = mean, b = stddev.
  // TruncatedGaussian: a = mean, b = stddev, lo/hi = support.
  // Uniform: fixed to [0, 1).
  double a = 0.0, b = 1.0, lo = 0.0, hi = 0.0;

  static NoiseSpec bernoulli(double p);
  static NoiseSpec gaussian(double mu, double sigma);
  static NoiseSpec truncated_gaussian(double mu, double sigma, double lo,
                                      double hi);
  static NoiseSpec uniform01();

  double sample(class Rng& rng) const;
};

// ---------------------------------------------------------------------------
// Structural equations
//
// Equations are small expression trees over: constants, parent-node values,
// the node's own noise draw, sums, products, floor, the logistic sigmoid,
// and a thresholded Bernoulli draw (value 1 if the node's uniform noise
// falls below the inner probability expression).

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
 public:
  enum class Op { Const, Var, Noise, Sum, Prod, Floor, Sigmoid, BernoulliDraw };

  Op op;
  double value = 0.0;              // Const
  int var = -1;                    // Var: node index
  std::vector<ExprPtr> children;   // Sum/Prod (n-ary), Floor/Sigmoid/BernoulliDraw (unary)

  double eval(const double* node_values, double noise) const;
  void collect_vars(std::vector<int>& out) const;
  bool uses_bernoulli_draw() const;
};

namespace expr {
ExprPtr constant(double v);
ExprPtr var(int node);
ExprPtr noise();
ExprPtr sum(std::vector<ExprPtr> terms);
ExprPtr prod(std::vector<ExprPtr> factors);
ExprPtr floor(ExprPtr e);
ExprPtr sigmoid(ExprPtr e);
ExprPtr bernoulli_draw(ExprPtr probability);
// w0 + sum_i w[i] * var(nodes[i]) — the common linear-index shorthand.
ExprPtr linear(double intercept, const std::vector<int>& nodes,
               const std::vector<double>& weights);
}  // namespace expr

// ---------------------------------------------------------------------------
// Structural equation model

// A full generative model over the graph: every node, the attribute
// included, has a noise distribution, and every node has an equation over
// its graph parents and its own noise (the attribute's equation is just
// its noise). All sampling is chunk-seeded and reproducible.
class Sem {
 public:
  Sem(CausalGraph graph, std::vector<ExprPtr> equations,
      std::vector<NoiseSpec> noises);

  const CausalGraph& graph() const { return graph_; }
  const NoiseSpec& noise_spec(int v) const { return noises_[v]; }
  const ExprPtr& equation(int v) const { return equations_[v]; }

  // n x V matrix of noise draws, columns in node order.
  Eigen::MatrixXd sample_noise(int n, std::uint64_t seed) const;

  // Observational evaluation: every node from its own equation.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& noise) const;

  // Evaluation with the attribute forced to `a`, all equations downstream.
  Eigen::MatrixXd evaluate_intervened(const Eigen::MatrixXd& noise,
                                      double a) const;

  // The two potential-outcome worlds behind the pathway-limited contrast:
  // v0 forces the attribute to 0 everywhere; v1pi hands each node the
  // intervened-to-1 value of a parent only when that parent edge lies on a
  // selected pathway, and the v0 value otherwise. Noise is shared, so rows
  // are matched individuals.
  struct WorldPair {
    Eigen::MatrixXd v0;     // n x V
    Eigen::MatrixXd v1pi;   // n x V
  };
  WorldPair evaluate_pathspecific(const Eigen::MatrixXd& noise,
                                  const PathwaySet& pi) const;

 private:
  CausalGraph graph_;
  std::vector<ExprPtr> equations_;
  std::vector<NoiseSpec> noises_;
};

// ---------------------------------------------------------------------------
// Simulation oracles
//
// Ground-truth functionals of a trained model under a known SEM, computed
// by Monte Carlo over matched potential-outcome pairs. Feature vectors
// follow the convention used across the library: one column per
// non-outcome observable node, in graph order, with the attribute column
// set to the world's attribute value; latent nodes are excluded.

// Indices of the nodes that form model feature columns.
std::vector<int> feature_nodes(const CausalGraph& g);
// Position of the attribute within the feature columns.
int attribute_feature_column(const CausalGraph& g);

struct OracleOptions {
  long long samples = 1000000;
  std::uint64_t seed = 1;
  int chunk = 65536;
  int round_decimals = 1;  // grouping resolution for subgroup statistics
};

struct OracleStats {
  double p0_mean = 0.0;       // E[c(x) | attribute <- 0 world]
  double p1_mean = 0.0;       // E[c(x) | attribute <- 1 along pathways]
  double flip_rate = 0.0;     // P(decision differs between the worlds)
  double subgroup_mean = 0.0; // mean over subgroups of per-group flip rates
  double subgroup_std = 0.0;  // population std over subgroup flip rates
};

OracleStats oracle_statistics(const Sem& sem, const PathwaySet& pi,
                              const FittedModel& fm, const OracleOptions& opt);

// Convenience accessors for the individual functionals.
std::pair<double, double> oracle_mean_marginals(const Sem& sem,
                                                const PathwaySet& pi,
                                                const FittedModel& fm,
                                                const OracleOptions& opt);
double oracle_flip_probability(const Sem& sem, const PathwaySet& pi,
                               const FittedModel& fm,
                               const OracleOptions& opt);
std::pair<double, double> oracle_conditional_mean_std(
    const Sem& sem, const PathwaySet& pi, const FittedModel& fm,
    const OracleOptions& opt);

}  // namespace pathfair
