#include "cgl/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include "cgl/errors.hpp"

namespace cgl {

ConcreteGraph ConcreteGraph::build(const std::vector<LabeledPair>& train_pairs,
                                   const ConceptStore& store) {
  ConcreteGraph g;

  std::set<std::string> ids;
  for (const auto& c : store.concepts()) ids.insert(c.id);
  for (const auto& p : train_pairs) {
    store.get(p.a_id);  // raises UnknownConcept on stray ids
    store.get(p.b_id);
    ids.insert(p.a_id);
    ids.insert(p.b_id);
  }
  g.node_ids_.assign(ids.begin(), ids.end());
  for (std::size_t i = 0; i < g.node_ids_.size(); ++i) g.node_index_[g.node_ids_[i]] = i;

  // Dedup to one unordered edge per related pair; track pairs that carry both
  // labels so the related edge can win with a conflict count.
  std::set<std::pair<std::uint32_t, std::uint32_t>> related_edges;
  std::set<std::pair<std::uint32_t, std::uint32_t>> unrelated_pairs;
  for (const auto& p : train_pairs) {
    auto a = static_cast<std::uint32_t>(g.node_index_[p.a_id]);
    auto b = static_cast<std::uint32_t>(g.node_index_[p.b_id]);
    if (a == b) continue;  // self-pairs are rejected at ingest already
    auto key = std::minmax(a, b);
    if (p.label == Label::related) {
      related_edges.insert(key);
    } else {
      unrelated_pairs.insert(key);
    }
  }
  for (const auto& e : related_edges) {
    if (unrelated_pairs.count(e)) ++g.conflict_count_;
  }

  g.adjacency_.resize(g.node_ids_.size());
  for (const auto& [a, b] : related_edges) {
    g.adjacency_[a].push_back(b);
    g.adjacency_[b].push_back(a);
  }
  for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());
  g.edge_count_ = related_edges.size();

  // Components via BFS from the smallest unvisited id; node_ids_ are sorted,
  // so components come out ordered by smallest member.
  const std::size_t n = g.node_ids_.size();
  g.component_of_.assign(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t start = 0; start < n; ++start) {
    if (g.component_of_[start] != std::numeric_limits<std::size_t>::max()) continue;
    std::size_t comp = g.components_.size();
    Component component;
    component.index = comp;
    std::deque<std::size_t> queue{start};
    g.component_of_[start] = comp;
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      component.member_ids.push_back(g.node_ids_[u]);
      for (std::uint32_t v : g.adjacency_[u]) {
        if (g.component_of_[v] == std::numeric_limits<std::size_t>::max()) {
          g.component_of_[v] = comp;
          queue.push_back(v);
        }
      }
    }
    std::sort(component.member_ids.begin(), component.member_ids.end());
    g.components_.push_back(std::move(component));
  }
  return g;
}

std::size_t ConcreteGraph::index_of(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) raise(Err::UnknownConcept, "node '" + id + "' not in graph");
  return it->second;
}

std::size_t ConcreteGraph::component_of_id(const std::string& id) const {
  return component_of_[index_of(id)];
}

std::vector<std::size_t> ConcreteGraph::bfs_distances(std::size_t source,
                                                      std::size_t max_dist) const {
  std::vector<std::size_t> dist(node_ids_.size(), std::numeric_limits<std::size_t>::max());
  dist[source] = 0;
  std::deque<std::size_t> queue{source};
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    if (dist[u] >= max_dist) continue;
    for (std::uint32_t v : adjacency_[u]) {
      if (dist[v] == std::numeric_limits<std::size_t>::max()) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<std::pair<std::string, std::size_t>> ConcreteGraph::k_hop_neighborhood(
    const std::string& id, std::size_t k) const {
  std::size_t src = index_of(id);
  auto dist = bfs_distances(src, k);
  std::vector<std::pair<std::string, std::size_t>> out;
  constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (v != src && dist[v] != unreachable && dist[v] <= k) {
      out.emplace_back(node_ids_[v], dist[v]);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second < y.second : x.first < y.first;
  });
  return out;
}

std::optional<std::size_t> ConcreteGraph::path_length(const std::string& a_id,
                                                      const std::string& b_id) const {
  std::size_t a = index_of(a_id);
  std::size_t b = index_of(b_id);
  if (a == b) return 0;
  if (component_of_[a] != component_of_[b]) return std::nullopt;
  auto dist = bfs_distances(a, std::numeric_limits<std::size_t>::max());
  return dist[b];
}

Label ConcreteGraph::infer_label(const std::string& a_id, const std::string& b_id) const {
  std::size_t a = index_of(a_id);
  std::size_t b = index_of(b_id);
  return component_of_[a] == component_of_[b] ? Label::related : Label::unrelated;
}

std::uint64_t closure_pair_count(std::uint64_t n) { return n * (n - 1) / 2; }

GraphStats graph_stats(const ConcreteGraph& graph) {
  GraphStats s;
  s.nodes = graph.node_count();
  s.edges = graph.edge_count();
  s.components = graph.components().size();
  s.conflicts = graph.conflict_count();
  std::map<std::size_t, std::size_t> hist;
  for (const auto& c : graph.components()) {
    ++hist[c.member_ids.size()];
    s.largest_component = std::max(s.largest_component, c.member_ids.size());
  }
  s.largest_component_closure_pairs = closure_pair_count(s.largest_component);
  s.size_histogram.assign(hist.begin(), hist.end());
  return s;
}

}  // namespace cgl
