#include "pathfair/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "pathfair/errors.hpp"
#include "pathfair/sem.hpp"

namespace pathfair {

namespace {

int column_of(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw ConfigError("unknown feature column: " + name);
}

}  // namespace

Recipe derive_recipe(const CausalGraph& g, const PathwaySet& pi) {
  if (pi.empty())
    throw ConfigError("pathway selection is empty; nothing to estimate");
  if (const std::string z = find_recanting_witness(g, pi); !z.empty())
    throw ConfigError("pathway selection has a recanting witness (" + z +
                      "); the pathway-limited contrast is not identifiable");
  for (const auto& p : pi.paths()) {
    if (p.size() > 3)
      throw ConfigError(
          "selected pathway has more than one intermediate node; outside the "
          "supported estimation family");
  }
  const std::set<int> mpi_nodes = pi.intermediate_nodes();
  if (mpi_nodes.size() > 1)
    throw ConfigError(
        "more than one on-path mediator; outside the supported estimation "
        "family");
  for (int v : mpi_nodes) {
    if (g.is_latent(v))
      throw ConfigError("selected pathway passes through latent node " +
                        g.name(v));
  }

  // Mediators: intermediate nodes of any attribute-to-outcome path.
  std::set<int> mediators;
  for (const auto& p : g.enumerate_paths(g.attribute(), g.outcome()))
    for (std::size_t i = 1; i + 1 < p.size(); ++i) mediators.insert(p[i]);
  for (int v : mediators) {
    if (g.is_latent(v) && !mpi_nodes.count(v))
      throw ConfigError("latent node " + g.name(v) +
                        " mediates the attribute-outcome relationship; the "
                        "reweighting template cannot adjust for it");
  }

  const std::set<int> desc = g.descendants(g.attribute());
  const auto feats = feature_nodes(g);

  Recipe r;
  for (std::size_t j = 0; j < feats.size(); ++j) {
    const int v = feats[j];
    r.feature_names.push_back(g.name(v));
    const int col = static_cast<int>(j);
    if (v == g.attribute()) {
      r.attribute_col = col;
    } else if (mpi_nodes.count(v)) {
      r.mpi_cols.push_back(col);
    } else if (mediators.count(v)) {
      r.mbar_cols.push_back(col);
    } else if (!desc.count(v)) {
      r.c_cols.push_back(col);
    }
    // Observed descendants of the attribute that are not mediators play no
    // role in the template and join no block.
  }
  return r;
}

Recipe recipe_from_roles(const std::vector<std::string>& feature_names,
                         const std::string& attribute,
                         const std::vector<std::string>& c_names,
                         const std::vector<std::string>& mpi_names,
                         const std::vector<std::string>& mbar_names) {
  Recipe r;
  r.feature_names = feature_names;
  r.attribute_col = column_of(feature_names, attribute);
  std::set<int> used{r.attribute_col};
  auto fill = [&](const std::vector<std::string>& names,
                  std::vector<int>& cols) {
    for (const auto& n : names) {
      const int c = column_of(feature_names, n);
      if (!used.insert(c).second)
        throw ConfigError("feature " + n + " assigned to multiple roles");
      cols.push_back(c);
    }
  };
  fill(c_names, r.c_cols);
  fill(mpi_names, r.mpi_cols);
  fill(mbar_names, r.mbar_cols);
  return r;
}

IpwWeights compute_ipw_weights(const PropensitySet& ps,
                               const Eigen::MatrixXd& X_raw,
                               const Eigen::VectorXd& attribute,
                               double clip) {
  const long n = X_raw.rows();
  if (attribute.size() != n)
    throw ConfigError("attribute vector length does not match data");
  const Eigen::VectorXd p_base = ps.base.probability(X_raw, clip);
  const Eigen::VectorXd p_mid = ps.mid.probability(X_raw, clip);
  const Eigen::VectorXd p_full = ps.full.probability(X_raw, clip);

  IpwWeights w;
  w.w0 = Eigen::VectorXd::Zero(n);
  w.w1 = Eigen::VectorXd::Zero(n);
  for (long i = 0; i < n; ++i) {
    if (attribute(i) == 0.0) {
      w.w0(i) = 1.0 / (1.0 - p_base(i));
    } else {
      w.w1(i) = (p_mid(i) * (1.0 - p_full(i))) /
                (p_base(i) * (1.0 - p_mid(i)) * p_full(i));
    }
  }
  return w;
}

MarginalEstimate estimate_marginals(const FittedModel& fm,
                                    const Eigen::MatrixXd& X_raw,
                                    const IpwWeights& w) {
  const Eigen::VectorXd c = fm.score(X_raw);
  const double n = static_cast<double>(X_raw.rows());
  MarginalEstimate m;
  m.p0_raw = w.w0.dot(c) / n;
  m.p1_raw = w.w1.dot(c) / n;
  m.p0 = std::clamp(m.p0_raw, 0.0, 1.0);
  m.p1 = std::clamp(m.p1_raw, 0.0, 1.0);
  return m;
}

double piu_upper_bound(double p0, double p1) {
  return 2.0 * (p1 * (1.0 - p0) + (1.0 - p1) * p0);
}

FeasibleRange feasible_range(double p0, double p1) {
  FeasibleRange f;
  f.lower = std::abs(p1 - p0);
  f.upper = std::min(p0 + p1, 2.0 - p0 - p1);
  return f;
}

// ---------------------------------------------------------------------------
// Partial identification

PartialIdTables build_partial_id_tables(const Eigen::MatrixXd& X_raw,
                                        const Eigen::VectorXd& attribute,
                                        int attribute_col, int r_col,
                                        int m_col, int bins) {
  const long n = X_raw.rows();
  if (attribute.size() != n)
    throw ConfigError("attribute vector length does not match data");
  if (bins < 2) throw ConfigError("need at least two proxy bins");
  PartialIdTables t;
  t.attribute_col = attribute_col;
  t.r_col = r_col;
  t.m_col = m_col;
  t.feature_dim = static_cast<int>(X_raw.cols());

  // Mediator levels and their baseline-stratum frequencies.
  std::map<double, long> m_counts_a0;
  long n_a0 = 0;
  std::set<double> m_seen;
  for (long i = 0; i < n; ++i) {
    m_seen.insert(X_raw(i, m_col));
    if (attribute(i) == 0.0) {
      ++n_a0;
      ++m_counts_a0[X_raw(i, m_col)];
    }
  }
  if (n_a0 == 0) throw ConfigError("no baseline-attribute rows in data");
  t.m_levels.assign(m_seen.begin(), m_seen.end());
  if (t.m_levels.size() > 64)
    throw ConfigError(
        "mediator has too many distinct levels for grid-based bounds");
  t.p_m_a0.resize(t.m_levels.size());
  for (std::size_t k = 0; k < t.m_levels.size(); ++k) {
    const auto it = m_counts_a0.find(t.m_levels[k]);
    t.p_m_a0(k) = it == m_counts_a0.end()
                      ? 0.0
                      : static_cast<double>(it->second) / n_a0;
  }

  // Equal-frequency bins over the pooled proxy column.
  std::vector<double> r_sorted(n);
  for (long i = 0; i < n; ++i) r_sorted[i] = X_raw(i, r_col);
  std::sort(r_sorted.begin(), r_sorted.end());
  std::vector<double> cuts;  // upper edges of bins 0..bins-2
  for (int b = 1; b < bins; ++b) {
    const long idx = std::min<long>(n - 1, (n * b) / bins);
    cuts.push_back(r_sorted[idx]);
  }
  auto bin_of = [&cuts](double r) {
    return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), r) -
                            cuts.begin());
  };

  Eigen::VectorXd sums = Eigen::VectorXd::Zero(bins);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
  Eigen::VectorXd counts_a0 = Eigen::VectorXd::Zero(bins);
  Eigen::VectorXd counts_a1 = Eigen::VectorXd::Zero(bins);
  long n_a1 = 0;
  for (long i = 0; i < n; ++i) {
    const int b = bin_of(X_raw(i, r_col));
    sums(b) += X_raw(i, r_col);
    counts(b) += 1.0;
    if (attribute(i) == 0.0)
      counts_a0(b) += 1.0;
    else {
      counts_a1(b) += 1.0;
      ++n_a1;
    }
  }
  if (n_a1 == 0) throw ConfigError("no treated-attribute rows in data");
  t.r_reps.resize(bins);
  t.p_r_a0.resize(bins);
  t.p_r_a1.resize(bins);
  for (int b = 0; b < bins; ++b) {
    t.r_reps(b) = counts(b) > 0 ? sums(b) / counts(b) : 0.0;
    t.p_r_a0(b) = counts_a0(b) / static_cast<double>(n_a0);
    t.p_r_a1(b) = counts_a1(b) / static_cast<double>(n_a1);
  }
  return t;
}

Eigen::MatrixXd PartialIdTables::grid(double a) const {
  const int nb = static_cast<int>(r_reps.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(grid_rows(), feature_dim);
  int row = 0;
  for (std::size_t k = 0; k < m_levels.size(); ++k) {
    for (int b = 0; b < nb; ++b, ++row) {
      G(row, attribute_col) = a;
      G(row, r_col) = r_reps(b);
      G(row, m_col) = m_levels[k];
    }
  }
  return G;
}

PartialIdDerivs partial_id_from_scores(const Eigen::VectorXd& scores_a0,
                                       const Eigen::VectorXd& scores_a1,
                                       const PartialIdTables& t) {
  const int nb = static_cast<int>(t.r_reps.size());
  const int nm = static_cast<int>(t.m_levels.size());
  if (scores_a0.size() != t.grid_rows() || scores_a1.size() != t.grid_rows())
    throw ConfigError("grid score vector has wrong length");

  PartialIdDerivs out;
  out.dl0 = Eigen::VectorXd::Zero(t.grid_rows());
  out.du0 = Eigen::VectorXd::Zero(t.grid_rows());
  out.dl1 = Eigen::VectorXd::Zero(t.grid_rows());
  out.du1 = Eigen::VectorXd::Zero(t.grid_rows());

  auto accumulate = [&](const Eigen::VectorXd& scores,
                        const Eigen::VectorXd& p_r, double& lower,
                        double& upper, Eigen::VectorXd& dl,
                        Eigen::VectorXd& du) {
    lower = 0.0;
    upper = 0.0;
    for (int k = 0; k < nm; ++k) {
      double s = 0.0;
      for (int b = 0; b < nb; ++b) s += scores(k * nb + b) * p_r(b);
      const double pm = t.p_m_a0(k);
      // max{0, pm - 1 + s}: active only when strictly positive.
      if (pm - 1.0 + s > 0.0) {
        lower += pm - 1.0 + s;
        for (int b = 0; b < nb; ++b) dl(k * nb + b) = p_r(b);
      }
      // min{pm, s}: the score branch is active only when strictly smaller.
      if (s < pm) {
        upper += s;
        for (int b = 0; b < nb; ++b) du(k * nb + b) = p_r(b);
      } else {
        upper += pm;
      }
    }
  };

  accumulate(scores_a0, t.p_r_a0, out.bounds.l0, out.bounds.u0, out.dl0,
             out.du0);
  accumulate(scores_a1, t.p_r_a1, out.bounds.l1, out.bounds.u1, out.dl1,
             out.du1);
  return out;
}

PartialIdBounds partial_id_bounds(const FittedModel& fm,
                                  const PartialIdTables& t) {
  const Eigen::VectorXd c0 = fm.score(t.grid(0.0));
  const Eigen::VectorXd c1 = fm.score(t.grid(1.0));
  return partial_id_from_scores(c0, c1, t).bounds;
}

}  // namespace pathfair
