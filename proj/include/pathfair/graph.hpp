#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pathfair {

// A causal diagram: a DAG over named nodes with one designated sensitive
// attribute node and one outcome node. Nodes may be marked latent
// (unobserved); latent nodes participate in the structural model but are
// excluded from anything an estimator may condition on.
class CausalGraph {
 public:
  CausalGraph(std::vector<std::string> nodes,
              const std::vector<std::pair<std::string, std::string>>& edges,
              const std::string& attribute, const std::string& outcome,
              const std::vector<std::string>& latent_nodes = {});

  int node_count() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int v) const { return names_[v]; }
  int index_of(const std::string& name) const;  // throws ConfigError if absent
  bool has_node(const std::string& name) const;

  int attribute() const { return attribute_; }
  int outcome() const { return outcome_; }
  bool is_latent(int v) const { return latent_[v]; }

  const std::vector<int>& parents(int v) const { return parents_[v]; }
  const std::vector<int>& children(int v) const { return children_[v]; }
  bool has_edge(int u, int v) const;

  // Indices in a fixed topological order (parents precede children).
  const std::vector<int>& topological_order() const { return topo_; }

  // All strict descendants of v (not including v itself).
  std::set<int> descendants(int v) const;

  // Every directed path from `from` to `to`, each path a node-index
  // sequence starting at `from` and ending at `to`. Throws RuntimeFailure
  // if more than `max_paths` exist (these graphs are small by design).
  std::vector<std::vector<int>> enumerate_paths(int from, int to,
                                                std::size_t max_paths = 100000) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<bool> latent_;
  std::vector<int> topo_;
  int attribute_ = -1;
  int outcome_ = -1;
};

// A set of directed attribute-to-outcome paths singled out as unfair.
// Paths are stored as node-index sequences into a specific graph.
class PathwaySet {
 public:
  PathwaySet() = default;

  // Validates every path against the graph: must start at the attribute,
  // end at the outcome, follow existing edges, and contain no duplicates.
  PathwaySet(const CausalGraph& g, std::vector<std::vector<int>> paths);

  // Convenience: build from node-name sequences.
  static PathwaySet from_names(
      const CausalGraph& g,
      const std::vector<std::vector<std::string>>& paths);

  const std::vector<std::vector<int>>& paths() const { return paths_; }
  bool empty() const { return paths_.empty(); }

  // True if edge (u, v) appears as a consecutive pair on some path.
  bool contains_edge(int u, int v) const;

  // All nodes that appear on some path strictly between the endpoints.
  std::set<int> intermediate_nodes() const;

 private:
  std::vector<std::vector<int>> paths_;
  std::set<std::pair<int, int>> edges_;
};

// Parents of a node split by whether their edge into the node lies on one
// of the selected pathways. Used when evaluating path-specific worlds: the
// on-path parents hand the node their pathway-world values, the off-path
// parents their reference-world values.
struct ParentPartition {
  std::vector<int> on_path;
  std::vector<int> off_path;
};

ParentPartition partition_parents(const CausalGraph& g, int v,
                                  const PathwaySet& pi);

// Detects a recanting witness: a node Z (other than the endpoints) such
// that (1) some selected path reaches Z from the attribute, (2) some
// selected path continues from Z to the outcome, and (3) the graph also
// contains a Z-to-outcome path that is not part of any selected path.
// When such a Z exists the path-specific effect is not identifiable and
// the pathway set is rejected by estimator-recipe derivation.
// Returns the name of a witness, or an empty string if none exists.
std::string find_recanting_witness(const CausalGraph& g, const PathwaySet& pi);

}  // namespace pathfair
