#include "pathfair/sem.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "pathfair/errors.hpp"
#include "pathfair/rng.hpp"

namespace pathfair {

// ---------------------------------------------------------------------------
// NoiseSpec

NoiseSpec NoiseSpec::bernoulli(double p) {
  if (p < 0.0 || p > 1.0) throw ConfigError("bernoulli probability outside [0,1]");
  NoiseSpec s;
  s.kind = Kind::Bernoulli;
  s.a = p;
  return s;
}

NoiseSpec NoiseSpec::gaussian(double mu, double sigma) {
  if (sigma <= 0.0) throw ConfigError("gaussian stddev must be positive");
  NoiseSpec s;
  s.kind = Kind::Gaussian;
  s.a = mu;
  s.b = sigma;
  return s;
}

NoiseSpec NoiseSpec::truncated_gaussian(double mu, double sigma, double lo,
                                        double hi) {
  if (sigma <= 0.0) throw ConfigError("gaussian stddev must be positive");
  if (lo >= hi) throw ConfigError("truncation interval is empty");
  NoiseSpec s;
  s.kind = Kind::TruncatedGaussian;
  s.a = mu;
  s.b = sigma;
  s.lo = lo;
  s.hi = hi;
  return s;
}

NoiseSpec NoiseSpec::uniform01() {
  NoiseSpec s;
  s.kind = Kind::Uniform;
  return s;
}

double NoiseSpec::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Bernoulli:
      return rng.bernoulli(a);
    case Kind::Gaussian:
      return rng.gaussian(a, b);
    case Kind::TruncatedGaussian:
      return rng.truncated_gaussian(a, b, lo, hi);
    case Kind::Uniform:
      return rng.uniform();
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Expr

double Expr::eval(const double* node_values, double noise) const {
  switch (op) {
    case Op::Const:
      return value;
    case Op::Var:
      return node_values[var];
    case Op::Noise:
      return noise;
    case Op::Sum: {
      double s = 0.0;
      for (const auto& c : children) s += c->eval(node_values, noise);
      return s;
    }
    case Op::Prod: {
      double p = 1.0;
      for (const auto& c : children) p *= c->eval(node_values, noise);
      return p;
    }
    case Op::Floor:
      return std::floor(children[0]->eval(node_values, noise));
    case Op::Sigmoid: {
      const double z = children[0]->eval(node_values, noise);
      return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                      : std::exp(z) / (1.0 + std::exp(z));
    }
    case Op::BernoulliDraw:
      return noise < children[0]->eval(node_values, noise) ? 1.0 : 0.0;
  }
  return 0.0;
}

void Expr::collect_vars(std::vector<int>& out) const {
  if (op == Op::Var) out.push_back(var);
  for (const auto& c : children) c->collect_vars(out);
}

bool Expr::uses_bernoulli_draw() const {
  if (op == Op::BernoulliDraw) return true;
  for (const auto& c : children)
    if (c->uses_bernoulli_draw()) return true;
  return false;
}

namespace expr {

namespace {
ExprPtr make(Expr::Op op, std::vector<ExprPtr> kids = {}) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->children = std::move(kids);
  return e;
}
}  // namespace

ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>();
  e->op = Expr::Op::Const;
  e->value = v;
  return e;
}

ExprPtr var(int node) {
  auto e = std::make_shared<Expr>();
  e->op = Expr::Op::Var;
  e->var = node;
  return e;
}

ExprPtr noise() { return make(Expr::Op::Noise); }

ExprPtr sum(std::vector<ExprPtr> terms) { return make(Expr::Op::Sum, std::move(terms)); }

ExprPtr prod(std::vector<ExprPtr> factors) {
  return make(Expr::Op::Prod, std::move(factors));
}

ExprPtr floor(ExprPtr e) { return make(Expr::Op::Floor, {std::move(e)}); }

ExprPtr sigmoid(ExprPtr e) { return make(Expr::Op::Sigmoid, {std::move(e)}); }

ExprPtr bernoulli_draw(ExprPtr probability) {
  return make(Expr::Op::BernoulliDraw, {std::move(probability)});
}

ExprPtr linear(double intercept, const std::vector<int>& nodes,
               const std::vector<double>& weights) {
  if (nodes.size() != weights.size())
    throw ConfigError("linear expression needs one weight per node");
  std::vector<ExprPtr> terms{constant(intercept)};
  for (std::size_t i = 0; i < nodes.size(); ++i)
    terms.push_back(prod({constant(weights[i]), var(nodes[i])}));
  return sum(std::move(terms));
}

}  // namespace expr

// ---------------------------------------------------------------------------
// Sem

Sem::Sem(CausalGraph graph, std::vector<ExprPtr> equations,
         std::vector<NoiseSpec> noises)
    : graph_(std::move(graph)),
      equations_(std::move(equations)),
      noises_(std::move(noises)) {
  const int n = graph_.node_count();
  if (static_cast<int>(equations_.size()) != n)
    throw ConfigError("need exactly one equation per node");
  if (static_cast<int>(noises_.size()) != n)
    throw ConfigError("need exactly one noise distribution per node");
  for (int v = 0; v < n; ++v) {
    if (!equations_[v]) throw ConfigError("missing equation for node " + graph_.name(v));
    std::vector<int> vars;
    equations_[v]->collect_vars(vars);
    for (int u : vars) {
      const auto& par = graph_.parents(v);
      if (std::find(par.begin(), par.end(), u) == par.end())
        throw ConfigError("equation for " + graph_.name(v) +
                          " references non-parent " + graph_.name(u));
    }
    if (equations_[v]->uses_bernoulli_draw() &&
        noises_[v].kind != NoiseSpec::Kind::Uniform)
      throw ConfigError("bernoulli-draw equations need uniform noise (node " +
                        graph_.name(v) + ")");
  }
}

Eigen::MatrixXd Sem::sample_noise(int n, std::uint64_t seed) const {
  const int nv = graph_.node_count();
  Eigen::MatrixXd U(n, nv);
  for (int v = 0; v < nv; ++v) {
    Rng rng(derive_seed(seed, "noise/" + graph_.name(v)));
    for (int i = 0; i < n; ++i) U(i, v) = noises_[v].sample(rng);
  }
  return U;
}

Eigen::MatrixXd Sem::evaluate(const Eigen::MatrixXd& noise) const {
  const int nv = graph_.node_count();
  if (noise.cols() != nv) throw ConfigError("noise matrix has wrong width");
  const long n = noise.rows();
  Eigen::MatrixXd V(n, nv);
  std::vector<double> row(nv, 0.0);
  for (long i = 0; i < n; ++i) {
    for (int v : graph_.topological_order())
      row[v] = equations_[v]->eval(row.data(), noise(i, v));
    for (int v = 0; v < nv; ++v) V(i, v) = row[v];
  }
  return V;
}

Eigen::MatrixXd Sem::evaluate_intervened(const Eigen::MatrixXd& noise,
                                         double a) const {
  const int nv = graph_.node_count();
  if (noise.cols() != nv) throw ConfigError("noise matrix has wrong width");
  const long n = noise.rows();
  const int attr = graph_.attribute();
  Eigen::MatrixXd V(n, nv);
  std::vector<double> row(nv, 0.0);
  for (long i = 0; i < n; ++i) {
    for (int v : graph_.topological_order())
      row[v] = (v == attr) ? a : equations_[v]->eval(row.data(), noise(i, v));
    for (int v = 0; v < nv; ++v) V(i, v) = row[v];
  }
  return V;
}

Sem::WorldPair Sem::evaluate_pathspecific(const Eigen::MatrixXd& noise,
                                          const PathwaySet& pi) const {
  const int nv = graph_.node_count();
  if (noise.cols() != nv) throw ConfigError("noise matrix has wrong width");
  const long n = noise.rows();
  const int attr = graph_.attribute();

  std::vector<ParentPartition> parts(nv);
  for (int v = 0; v < nv; ++v) parts[v] = partition_parents(graph_, v, pi);

  WorldPair w;
  w.v0.resize(n, nv);
  w.v1pi.resize(n, nv);
  std::vector<double> r0(nv, 0.0), rpi(nv, 0.0), buf(nv, 0.0);
  for (long i = 0; i < n; ++i) {
    for (int v : graph_.topological_order()) {
      if (v == attr) {
        r0[v] = 0.0;
        rpi[v] = 1.0;
        continue;
      }
      const double u = noise(i, v);
      r0[v] = equations_[v]->eval(r0.data(), u);
      // Inputs for the pathway world: on-path parents hand over their
      // pathway-world values, everything else stays in the baseline world.
      for (int p : graph_.parents(v)) buf[p] = r0[p];
      for (int p : parts[v].on_path) buf[p] = rpi[p];
      rpi[v] = equations_[v]->eval(buf.data(), u);
    }
    for (int v = 0; v < nv; ++v) {
      w.v0(i, v) = r0[v];
      w.v1pi(i, v) = rpi[v];
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Oracles

std::vector<int> feature_nodes(const CausalGraph& g) {
  std::vector<int> cols;
  for (int v = 0; v < g.node_count(); ++v)
    if (v != g.outcome() && !g.is_latent(v)) cols.push_back(v);
  return cols;
}

int attribute_feature_column(const CausalGraph& g) {
  const auto cols = feature_nodes(g);
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (cols[j] == g.attribute()) return static_cast<int>(j);
  throw ConfigError("attribute is not among the feature nodes");
}

namespace {

// Subgroup accumulator keyed by the rounded baseline-world features
// (attribute column excluded — groups collect matched pairs that look
// identical on everything the decision could fairly depend on).
struct GroupAgg {
  long long flips = 0;
  long long count = 0;
};

std::string group_key(const Eigen::MatrixXd& v0, long row,
                      const std::vector<int>& cols, int attr, double factor) {
  std::string key;
  key.reserve(cols.size() * sizeof(long long));
  for (int c : cols) {
    if (c == attr) continue;
    const long long q = llround(v0(row, c) * factor);
    char bytes[sizeof(long long)];
    std::memcpy(bytes, &q, sizeof(long long));
    key.append(bytes, sizeof(long long));
  }
  return key;
}

}  // namespace

OracleStats oracle_statistics(const Sem& sem, const PathwaySet& pi,
                              const FittedModel& fm,
                              const OracleOptions& opt) {
  const CausalGraph& g = sem.graph();
  const auto cols = feature_nodes(g);
  const int attr = g.attribute();
  const double factor = std::pow(10.0, opt.round_decimals);

  long double sum0 = 0.0L, sum1 = 0.0L;
  long long flips = 0;
  std::unordered_map<std::string, GroupAgg> groups;

  long long remaining = opt.samples;
  std::uint64_t chunk_index = 0;
  while (remaining > 0) {
    const int m = static_cast<int>(std::min<long long>(remaining, opt.chunk));
    const Eigen::MatrixXd U =
        sem.sample_noise(m, derive_seed(opt.seed, "oracle-chunk", chunk_index));
    const Sem::WorldPair w = sem.evaluate_pathspecific(U, pi);

    Eigen::MatrixXd X0(m, cols.size()), X1(m, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      X0.col(j) = w.v0.col(cols[j]);
      X1.col(j) = w.v1pi.col(cols[j]);
    }
    const Eigen::VectorXd c0 = fm.score(X0);
    const Eigen::VectorXd c1 = fm.score(X1);
    sum0 += c0.sum();
    sum1 += c1.sum();
    for (int i = 0; i < m; ++i) {
      const bool d0 = c0(i) >= 0.5;
      const bool d1 = c1(i) >= 0.5;
      const int flip = (d0 != d1) ? 1 : 0;
      flips += flip;
      GroupAgg& agg = groups[group_key(w.v0, i, cols, attr, factor)];
      agg.flips += flip;
      agg.count += 1;
    }
    remaining -= m;
    ++chunk_index;
  }

  OracleStats out;
  const double n = static_cast<double>(opt.samples);
  out.p0_mean = static_cast<double>(sum0 / n);
  out.p1_mean = static_cast<double>(sum1 / n);
  out.flip_rate = static_cast<double>(flips) / n;

  // Unweighted mean over subgroups, then the population standard deviation
  // of the per-subgroup flip rates around that mean.
  const double K = static_cast<double>(groups.size());
  double mu = 0.0;
  for (const auto& [key, agg] : groups)
    mu += static_cast<double>(agg.flips) / static_cast<double>(agg.count);
  mu /= K;
  double ss = 0.0;
  for (const auto& [key, agg] : groups) {
    const double gk =
        static_cast<double>(agg.flips) / static_cast<double>(agg.count);
    ss += (gk - mu) * (gk - mu);
  }
  out.subgroup_mean = mu;
  out.subgroup_std = std::sqrt(ss / K);
  return out;
}

std::pair<double, double> oracle_mean_marginals(const Sem& sem,
                                                const PathwaySet& pi,
                                                const FittedModel& fm,
                                                const OracleOptions& opt) {
  const OracleStats s = oracle_statistics(sem, pi, fm, opt);
  return {s.p0_mean, s.p1_mean};
}

double oracle_flip_probability(const Sem& sem, const PathwaySet& pi,
                               const FittedModel& fm,
                               const OracleOptions& opt) {
  return oracle_statistics(sem, pi, fm, opt).flip_rate;
}

std::pair<double, double> oracle_conditional_mean_std(
    const Sem& sem, const PathwaySet& pi, const FittedModel& fm,
    const OracleOptions& opt) {
  const OracleStats s = oracle_statistics(sem, pi, fm, opt);
  return {s.subgroup_mean, s.subgroup_std};
}

}  // namespace pathfair
