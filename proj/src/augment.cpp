#include "cgl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cgl/errors.hpp"
#include "cgl/parallel.hpp"
#include "cgl/rng.hpp"

namespace cgl {

namespace {

constexpr std::uint64_t kUnrelatedSeedSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kShuffleSeedSalt = 0x7f4a7c159e3779b9ULL;

struct Candidate {
  std::uint32_t u;
  std::uint32_t v;
  std::uint32_t dist;
};

void validate(const AugmentConfig& config) {
  if (config.k < 2) raise(Err::InvalidConfig, "augmentation k must be >= 2");
  if (std::isnan(config.target_ratio) || config.target_ratio < 1.0) {
    raise(Err::InvalidConfig, "target ratio must be >= 1 or infinity");
  }
}

PairKey make_key(const std::string& a, const std::string& b) {
  return a < b ? PairKey{a, b} : PairKey{b, a};
}

// Walks every distance-2..k candidate pair (u < v), excluding `annotated`,
// in ascending node order. emit may be null for a counting pass.
template <typename Emit>
std::uint64_t scan_candidates_from(const ConcreteGraph& graph, std::size_t u, std::size_t k,
                                   const std::set<PairKey>& annotated, Emit&& emit) {
  auto dist = graph.bfs_distances(u, k);
  std::uint64_t found = 0;
  constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();
  for (std::size_t v = u + 1; v < dist.size(); ++v) {
    if (dist[v] == unreachable) continue;  // other component, even when k is unbounded
    if (dist[v] < 2 || dist[v] > k) continue;
    if (annotated.count(make_key(graph.id_of(u), graph.id_of(v)))) continue;
    ++found;
    emit(Candidate{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v),
                   static_cast<std::uint32_t>(dist[v])});
  }
  return found;
}

std::uint64_t count_candidates(const ConcreteGraph& graph, std::size_t k,
                               const std::set<PairKey>& annotated) {
  std::vector<std::uint64_t> per_node(graph.node_count(), 0);
  parallel_for(graph.node_count(), 0, [&](std::size_t u) {
    per_node[u] = scan_candidates_from(graph, u, k, annotated, [](const Candidate&) {});
  });
  std::uint64_t total = 0;
  for (auto c : per_node) total += c;
  return total;
}

std::vector<Candidate> materialize_candidates(const ConcreteGraph& graph, std::size_t k,
                                              const std::set<PairKey>& annotated) {
  std::vector<std::vector<Candidate>> slots(graph.node_count());
  parallel_for(graph.node_count(), 0, [&](std::size_t u) {
    scan_candidates_from(graph, u, k, annotated,
                         [&](const Candidate& c) { slots[u].push_back(c); });
  });
  std::vector<Candidate> all;
  for (auto& s : slots) all.insert(all.end(), s.begin(), s.end());
  return all;
}

LabeledPair to_related_pair(const ConcreteGraph& graph, const Candidate& c) {
  LabeledPair p;
  p.a_id = graph.id_of(c.u);  // node order is id order, so u < v is canonical
  p.b_id = graph.id_of(c.v);
  p.label = Label::related;
  p.origin = Origin::augmented;
  return p;
}

}  // namespace

std::set<PairKey> annotated_pair_set(const std::vector<LabeledPair>& pairs) {
  std::set<PairKey> keys;
  for (const auto& p : pairs) keys.insert(make_key(p.a_id, p.b_id));
  return keys;
}

std::uint64_t count_possible_related(const ConcreteGraph& graph, std::size_t k) {
  if (k == k_infinity) {
    std::uint64_t total = 0;
    for (const auto& c : graph.components()) {
      total += closure_pair_count(c.member_ids.size());
    }
    return total - graph.edge_count();
  }
  static const std::set<PairKey> no_exclusions;
  return count_candidates(graph, k, no_exclusions);
}

SampledRelated sample_related(const ConcreteGraph& graph, const AugmentConfig& config,
                              const std::set<PairKey>& annotated) {
  validate(config);
  SampledRelated out;

  const std::uint64_t original = graph.edge_count();
  const bool unbounded = std::isinf(config.target_ratio);
  std::uint64_t n_candidates = count_candidates(graph, config.k, annotated);
  std::uint64_t target;
  if (unbounded) {
    target = n_candidates;
    out.exhausted = true;  // an infinite request consumes whatever the pool holds
  } else {
    // computed in double and clamped to the pool so huge finite ratios
    // saturate instead of overflowing the cast
    const double want =
        std::ceil((config.target_ratio - 1.0) * static_cast<double>(original));
    target = want <= 0 ? 0
             : want >= static_cast<double>(n_candidates)
                 ? n_candidates
                 : static_cast<std::uint64_t>(want);
    out.exhausted = want > static_cast<double>(n_candidates);
  }
  if (target == 0) return out;

  Rng rng(config.seed);
  std::vector<Candidate> chosen;
  if (n_candidates <= config.candidate_cap || target >= n_candidates) {
    auto all = materialize_candidates(graph, config.k, annotated);
    rng.shuffle(all);
    std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(target, all.size()));
    chosen.assign(all.begin(), all.begin() + take);
  } else {
    // Candidate set too large to hold; reservoir-sample the stream instead.
    chosen.reserve(static_cast<std::size_t>(target));
    std::uint64_t seen = 0;
    for (std::size_t u = 0; u < graph.node_count(); ++u) {
      scan_candidates_from(graph, u, config.k, annotated, [&](const Candidate& c) {
        if (seen < target) {
          chosen.push_back(c);
        } else {
          std::uint64_t j = rng.bounded(seen + 1);
          if (j < target) chosen[static_cast<std::size_t>(j)] = c;
        }
        ++seen;
      });
    }
    rng.shuffle(chosen);
  }

  out.pairs.reserve(chosen.size());
  out.distances.reserve(chosen.size());
  for (const auto& c : chosen) {
    out.pairs.push_back(to_related_pair(graph, c));
    out.distances.push_back(c.dist);
  }
  return out;
}

SampledUnrelated sample_unrelated(const ConcreteGraph& graph, std::uint64_t count,
                                  std::uint64_t seed, const std::set<PairKey>& existing) {
  SampledUnrelated out;
  if (count == 0) return out;
  if (graph.components().size() < 2) {
    raise(Err::NoUnrelatedCandidates, "graph has a single component");
  }

  const std::size_t n = graph.node_count();
  std::uint64_t cross_total = closure_pair_count(n);
  for (const auto& c : graph.components()) {
    cross_total -= closure_pair_count(c.member_ids.size());
  }
  std::uint64_t excluded = 0;
  for (const auto& key : existing) {
    if (graph.has_node(key.first) && graph.has_node(key.second) &&
        graph.component_of_id(key.first) != graph.component_of_id(key.second)) {
      ++excluded;
    }
  }
  std::uint64_t available = cross_total - excluded;

  auto cross_pair = [&](std::size_t i, std::size_t j) {
    LabeledPair p;
    p.a_id = graph.id_of(std::min(i, j));
    p.b_id = graph.id_of(std::max(i, j));
    p.label = Label::unrelated;
    p.origin = Origin::augmented;
    return p;
  };

  Rng rng(seed);
  constexpr std::uint64_t kEnumerateLimit = 200'000;
  if (count >= available || available <= kEnumerateLimit) {
    std::vector<LabeledPair> all;
    all.reserve(static_cast<std::size_t>(available));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (graph.component_of(i) == graph.component_of(j)) continue;
        if (existing.count(make_key(graph.id_of(i), graph.id_of(j)))) continue;
        all.push_back(cross_pair(i, j));
      }
    }
    rng.shuffle(all);
    if (count < all.size()) {
      all.resize(static_cast<std::size_t>(count));
    } else {
      out.exhausted = all.size() < count;
    }
    out.pairs = std::move(all);
    return out;
  }

  // Huge pool: rejection sampling with dedup; collisions are rare because
  // count << available.
  std::set<PairKey> drawn;
  while (out.pairs.size() < count) {
    std::size_t i = static_cast<std::size_t>(rng.bounded(n));
    std::size_t j = static_cast<std::size_t>(rng.bounded(n));
    if (i == j) continue;
    if (graph.component_of(i) != graph.component_of(j)) {
      auto key = make_key(graph.id_of(i), graph.id_of(j));
      if (existing.count(key) || drawn.count(key)) continue;
      drawn.insert(key);
      out.pairs.push_back(cross_pair(i, j));
    }
  }
  return out;
}

std::pair<std::vector<LabeledPair>, AugmentReport> augment_dataset(
    const std::vector<LabeledPair>& train_pairs, const ConcreteGraph& graph,
    const AugmentConfig& config) {
  validate(config);
  auto annotated = annotated_pair_set(train_pairs);

  auto related = sample_related(graph, config, annotated);
  auto unrelated =
      sample_unrelated(graph, related.pairs.size(), config.seed ^ kUnrelatedSeedSalt, annotated);

  AugmentReport report;
  report.original_related = graph.edge_count();
  report.sampled_related = related.pairs.size();
  report.sampled_unrelated = unrelated.pairs.size();
  report.possible_related = count_possible_related(graph, config.k);
  report.target_ratio = config.target_ratio;
  report.related_exhausted = related.exhausted;
  report.unrelated_exhausted = unrelated.exhausted;
  if (report.original_related > 0) {
    report.realized_ratio =
        static_cast<double>(report.original_related + report.sampled_related) /
        static_cast<double>(report.original_related);
  }
  std::map<std::size_t, std::uint64_t> hist;
  for (auto d : related.distances) ++hist[d];
  report.distance_histogram.assign(hist.begin(), hist.end());

  std::vector<LabeledPair> combined = train_pairs;
  combined.insert(combined.end(), related.pairs.begin(), related.pairs.end());
  combined.insert(combined.end(), unrelated.pairs.begin(), unrelated.pairs.end());
  Rng rng(config.seed ^ kShuffleSeedSalt);
  rng.shuffle(combined);
  return {std::move(combined), std::move(report)};
}

}  // namespace cgl
