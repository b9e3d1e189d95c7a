#include "pathfair/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "pathfair/errors.hpp"

namespace pathfair {

CausalGraph::CausalGraph(
    std::vector<std::string> nodes,
    const std::vector<std::pair<std::string, std::string>>& edges,
    const std::string& attribute, const std::string& outcome,
    const std::vector<std::string>& latent_nodes)
    : names_(std::move(nodes)) {
  if (names_.empty()) throw ConfigError("graph has no nodes");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t j = i + 1; j < names_.size(); ++j) {
      if (names_[i] == names_[j])
        throw ConfigError("duplicate node name: " + names_[i]);
    }
  }
  const int n = node_count();
  parents_.assign(n, {});
  children_.assign(n, {});
  latent_.assign(n, false);

  attribute_ = index_of(attribute);
  outcome_ = index_of(outcome);
  if (attribute_ == outcome_)
    throw ConfigError("attribute and outcome must be distinct nodes");
  for (const auto& name : latent_nodes) {
    const int v = index_of(name);
    if (v == attribute_ || v == outcome_)
      throw ConfigError("attribute and outcome cannot be latent: " + name);
    latent_[v] = true;
  }

  for (const auto& [uname, vname] : edges) {
    const int u = index_of(uname);
    const int v = index_of(vname);
    if (u == v) throw ConfigError("self-loop on node: " + uname);
    if (has_edge(u, v))
      throw ConfigError("duplicate edge: " + uname + " -> " + vname);
    children_[u].push_back(v);
    parents_[v].push_back(u);
  }
  if (!parents_[attribute_].empty())
    throw ConfigError("attribute node must have no parents");

  // Kahn's algorithm; failure to place every node means a cycle.
  std::vector<int> indeg(n, 0);
  for (int v = 0; v < n; ++v) indeg[v] = static_cast<int>(parents_[v].size());
  std::queue<int> ready;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(v);
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    topo_.push_back(v);
    for (int c : children_[v])
      if (--indeg[c] == 0) ready.push(c);
  }
  if (static_cast<int>(topo_.size()) != n)
    throw ConfigError("graph contains a cycle");
}

int CausalGraph::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  throw ConfigError("unknown node: " + name);
}

bool CausalGraph::has_node(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

bool CausalGraph::has_edge(int u, int v) const {
  const auto& ch = children_[u];
  return std::find(ch.begin(), ch.end(), v) != ch.end();
}

std::set<int> CausalGraph::descendants(int v) const {
  std::set<int> seen;
  std::queue<int> frontier;
  frontier.push(v);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int c : children_[u]) {
      if (seen.insert(c).second) frontier.push(c);
    }
  }
  return seen;
}

std::vector<std::vector<int>> CausalGraph::enumerate_paths(
    int from, int to, std::size_t max_paths) const {
  std::vector<std::vector<int>> out;
  std::vector<int> stack{from};
  std::function<void()> dfs = [&] {
    const int v = stack.back();
    if (v == to) {
      if (out.size() >= max_paths)
        throw RuntimeFailure("path enumeration exceeded limit");
      out.push_back(stack);
      return;
    }
    for (int c : children_[v]) {
      stack.push_back(c);
      dfs();
      stack.pop_back();
    }
  };
  dfs();
  return out;
}

PathwaySet::PathwaySet(const CausalGraph& g, std::vector<std::vector<int>> paths)
    : paths_(std::move(paths)) {
  std::set<std::vector<int>> unique;
  for (const auto& p : paths_) {
    if (p.size() < 2) throw ConfigError("pathway must have at least two nodes");
    if (p.front() != g.attribute())
      throw ConfigError("pathway must start at the attribute node");
    if (p.back() != g.outcome())
      throw ConfigError("pathway must end at the outcome node");
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      if (p[i] < 0 || p[i] >= g.node_count() || p[i + 1] < 0 ||
          p[i + 1] >= g.node_count())
        throw ConfigError("pathway references a node outside the graph");
      if (!g.has_edge(p[i], p[i + 1]))
        throw ConfigError("pathway uses a non-existent edge: " +
                          g.name(p[i]) + " -> " + g.name(p[i + 1]));
      edges_.insert({p[i], p[i + 1]});
    }
    if (!unique.insert(p).second) throw ConfigError("duplicate pathway");
  }
}

PathwaySet PathwaySet::from_names(
    const CausalGraph& g, const std::vector<std::vector<std::string>>& paths) {
  std::vector<std::vector<int>> idx;
  idx.reserve(paths.size());
  for (const auto& p : paths) {
    std::vector<int> q;
    q.reserve(p.size());
    for (const auto& name : p) q.push_back(g.index_of(name));
    idx.push_back(std::move(q));
  }
  return PathwaySet(g, std::move(idx));
}

bool PathwaySet::contains_edge(int u, int v) const {
  return edges_.count({u, v}) > 0;
}

std::set<int> PathwaySet::intermediate_nodes() const {
  std::set<int> out;
  for (const auto& p : paths_)
    for (std::size_t i = 1; i + 1 < p.size(); ++i) out.insert(p[i]);
  return out;
}

ParentPartition partition_parents(const CausalGraph& g, int v,
                                  const PathwaySet& pi) {
  ParentPartition part;
  for (int p : g.parents(v)) {
    if (pi.contains_edge(p, v))
      part.on_path.push_back(p);
    else
      part.off_path.push_back(p);
  }
  return part;
}

std::string find_recanting_witness(const CausalGraph& g,
                                   const PathwaySet& pi) {
  if (pi.empty()) return "";
  // Suffixes of selected paths, keyed by their start node, so condition (3)
  // can test whether a graph path is "part of" the selected set.
  std::set<std::vector<int>> selected_suffixes;
  for (const auto& p : pi.paths())
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
      selected_suffixes.insert(std::vector<int>(p.begin() + i, p.end()));

  for (int z : pi.intermediate_nodes()) {
    // Conditions (1) and (2) hold for every node strictly inside a selected
    // path: the path supplies both an attribute-to-Z and a Z-to-outcome
    // segment. Condition (3): some Z-to-outcome path is not a selected
    // suffix.
    for (const auto& q : g.enumerate_paths(z, g.outcome())) {
      if (!selected_suffixes.count(q)) return g.name(z);
    }
  }
  return "";
}

}  // namespace pathfair
