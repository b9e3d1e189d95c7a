#include "pathfair/metrics.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "pathfair/errors.hpp"

namespace pathfair {

double accuracy(const FittedModel& fm, const Eigen::MatrixXd& X_raw,
                const Eigen::VectorXd& y) {
  const Eigen::VectorXd c = fm.score(X_raw);
  long correct = 0;
  for (long i = 0; i < c.size(); ++i) {
    const double pred = c(i) >= 0.5 ? 1.0 : 0.0;
    if (pred == y(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(c.size());
}

EvalStats evaluate_model(const FittedModel& fm, const Eigen::MatrixXd& X_raw,
                         const Eigen::VectorXd& y, const IpwWeights& w,
                         bool pathway_inputs_masked) {
  EvalStats s;
  s.accuracy = accuracy(fm, X_raw, y);
  if (pathway_inputs_masked) {
    // Identical inputs in both worlds: every pathway statistic vanishes
    // identically, so do not let reweighting noise smear the zeros.
    return s;
  }
  const MarginalEstimate m = estimate_marginals(fm, X_raw, w);
  s.p0_raw = m.p0_raw;
  s.p1_raw = m.p1_raw;
  s.p0 = m.p0;
  s.p1 = m.p1;
  s.effect = m.p1 - m.p0;
  s.disagreement_bound = piu_upper_bound(m.p0, m.p1);
  return s;
}

namespace {

// P(X <= k) for X ~ Binomial(n, p), via the regularised incomplete beta.
double binomial_cdf(int k, int n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  return boost::math::ibeta(static_cast<double>(n - k),
                            static_cast<double>(k + 1), 1.0 - p);
}

// The CDF is strictly decreasing in p for 0 < k < n; bisect to the target.
double solve_rate(int k, int n, double target) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_cdf(k, n, mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TestSetBound test_set_bound(int k, int n, double delta) {
  if (n <= 0) throw ConfigError("test-set bound needs a positive count");
  if (k < 0 || k > n) throw ConfigError("error count outside [0, n]");
  if (delta <= 0.0 || delta >= 0.5)
    throw ConfigError("confidence level delta must lie in (0, 0.5)");
  TestSetBound b;
  b.lower = k == 0 ? 0.0 : solve_rate(k, n, 1.0 - delta);
  b.upper = k == n ? 1.0 : solve_rate(k, n, delta);
  return b;
}

}  // namespace pathfair
