#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgl/corpus.hpp"

namespace cgl {

/// One connected component; members sorted by id.
struct Component {
  std::size_t index = 0;
  std::vector<std::string> member_ids;
};

/// Undirected graph over concepts with edges for related pairs only.
/// Immutable after build; all queries are read-only.
class ConcreteGraph {
public:
  /// Builds the graph from training pairs. Every concept in the store becomes
  /// a node; related pairs add one undirected edge each (duplicates and
  /// reversed copies collapse). A pair annotated both related and unrelated
  /// resolves to related and is counted in conflict_count().
  static ConcreteGraph build(const std::vector<LabeledPair>& train_pairs,
                             const ConceptStore& store);

  const std::vector<std::string>& node_ids() const { return node_ids_; }
  std::size_t node_count() const { return node_ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t conflict_count() const { return conflict_count_; }

  bool has_node(const std::string& id) const { return node_index_.count(id) != 0; }
  std::size_t index_of(const std::string& id) const;
  const std::string& id_of(std::size_t idx) const { return node_ids_[idx]; }

  /// Neighbor indices, sorted by node id order.
  const std::vector<std::uint32_t>& neighbors(std::size_t idx) const { return adjacency_[idx]; }

  /// Components ordered by smallest member id.
  const std::vector<Component>& components() const { return components_; }
  std::size_t component_of(std::size_t idx) const { return component_of_[idx]; }
  std::size_t component_of_id(const std::string& id) const;

  /// Nodes within BFS distance 1..k of the given node, excluding the node
  /// itself. Sorted by (distance, id).
  std::vector<std::pair<std::string, std::size_t>> k_hop_neighborhood(const std::string& id,
                                                                      std::size_t k) const;

  /// Shortest-path edge count; empty when the nodes sit in different
  /// components; 0 when the ids coincide.
  std::optional<std::size_t> path_length(const std::string& a_id, const std::string& b_id) const;

  /// Same component (including a == b) means related.
  Label infer_label(const std::string& a_id, const std::string& b_id) const;

  /// BFS distances from a source, capped at max_dist (SIZE_MAX = unbounded).
  /// Unreachable nodes get SIZE_MAX.
  std::vector<std::size_t> bfs_distances(std::size_t source, std::size_t max_dist) const;

private:
  std::vector<std::string> node_ids_;  // sorted
  std::unordered_map<std::string, std::size_t> node_index_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::vector<std::size_t> component_of_;
  std::vector<Component> components_;
  std::size_t edge_count_ = 0;
  std::size_t conflict_count_ = 0;
};

/// Unordered pair count of a component turned into a complete subgraph:
/// n * (n - 1) / 2.
std::uint64_t closure_pair_count(std::uint64_t n);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t components = 0;
  std::size_t largest_component = 0;
  std::uint64_t largest_component_closure_pairs = 0;
  std::size_t conflicts = 0;
  std::vector<std::pair<std::size_t, std::size_t>> size_histogram;  // (size, count)
};

GraphStats graph_stats(const ConcreteGraph& graph);

}  // namespace cgl
