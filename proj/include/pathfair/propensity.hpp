#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pathfair {

// Ridge-regularised logistic regression fitted by iteratively reweighted
// least squares. Used for the nuisance propensity models behind inverse
// probability weights; predictions are clipped away from {0, 1} before
// they enter any weight denominator.
class LogisticPropensity {
 public:
  LogisticPropensity() = default;

  // `X` holds only the conditioning columns (possibly zero of them, which
  // fits an intercept-only model); `target` is binary 0/1. The ridge
  // penalty applies to the weights, not to the intercept.
  static LogisticPropensity fit(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& target,
                                double ridge = 1e-4, int max_iter = 100,
                                double tol = 1e-10);

  // P(target = 1 | x), clipped to [clip, 1 - clip].
  Eigen::VectorXd probability(const Eigen::MatrixXd& X,
                              double clip = 1e-3) const;

  // Weights followed by the intercept.
  const Eigen::VectorXd& coefficients() const { return beta_; }
  void set_coefficients(Eigen::VectorXd beta) { beta_ = std::move(beta); }
  int input_dim() const { return static_cast<int>(beta_.size()) - 1; }

 private:
  Eigen::VectorXd beta_;  // [w_1..w_d, b]
};

// The three nested attribute models an inverse-probability recipe needs:
//   base: P(A = 1 | C)
//   mid:  P(A = 1 | C, on-path mediators)
//   full: P(A = 1 | C, on-path mediators, off-path mediators)
// Column indices refer to the dataset's raw feature matrix; names are
// carried alongside for serialisation and error messages.
struct PropensityStage {
  std::vector<int> columns;
  std::vector<std::string> column_names;
  LogisticPropensity model;

  Eigen::VectorXd probability(const Eigen::MatrixXd& X_raw,
                              double clip = 1e-3) const;
};

struct PropensitySet {
  PropensityStage base;
  PropensityStage mid;
  PropensityStage full;
};

// Fits all three stages on raw (unstandardised) features. `attribute` is
// the binary attribute column; each stage conditions on the cumulative
// column sets.
PropensitySet fit_propensities(const Eigen::MatrixXd& X_raw,
                               const Eigen::VectorXd& attribute,
                               const std::vector<int>& c_cols,
                               const std::vector<int>& mpi_cols,
                               const std::vector<int>& mbar_cols,
                               const std::vector<std::string>& feature_names,
                               double ridge = 1e-4);

std::string serialize_propensities(const PropensitySet& ps);
PropensitySet deserialize_propensities(const std::string& json_text);
void save_propensities(const PropensitySet& ps, const std::string& path);
PropensitySet load_propensities(const std::string& path);

}  // namespace pathfair
