#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cgl/corpus.hpp"
#include "cgl/graph.hpp"

namespace cgl {

/// k == k_infinity (or target_ratio == infinity) lifts the respective bound.
inline constexpr std::size_t k_infinity = std::numeric_limits<std::size_t>::max();

struct AugmentConfig {
  std::size_t k = 2;            // hop bound, >= 2 (k_infinity allowed)
  double target_ratio = 2.0;    // >= 1, may be infinity
  std::uint64_t seed = 0;
  std::uint64_t candidate_cap = 5'000'000;  // above this, reservoir sampling kicks in
};

struct AugmentReport {
  std::uint64_t original_related = 0;
  std::uint64_t sampled_related = 0;
  std::uint64_t sampled_unrelated = 0;
  std::uint64_t possible_related = 0;
  double realized_ratio = 1.0;
  double target_ratio = 1.0;
  bool related_exhausted = false;   // candidate pool ran out before the target
  bool unrelated_exhausted = false;
  std::vector<std::pair<std::size_t, std::uint64_t>> distance_histogram;  // (distance, count)
};

using PairKey = std::pair<std::string, std::string>;  // canonical (min,max) ids

std::set<PairKey> annotated_pair_set(const std::vector<LabeledPair>& pairs);

/// Number of unordered node pairs at shortest-path distance d with
/// 2 <= d <= k. For k_infinity this is all same-component non-adjacent pairs.
std::uint64_t count_possible_related(const ConcreteGraph& graph, std::size_t k);

struct SampledRelated {
  std::vector<LabeledPair> pairs;  // related, origin = augmented, canonical order
  std::vector<std::size_t> distances;  // parallel to pairs
  bool exhausted = false;
};

/// Samples pairs uniformly from the distance-2..k candidate set, excluding
/// annotated pairs, until ceil((target_ratio - 1) * original_related) pairs
/// are drawn or candidates run out.
SampledRelated sample_related(const ConcreteGraph& graph, const AugmentConfig& config,
                              const std::set<PairKey>& annotated);

struct SampledUnrelated {
  std::vector<LabeledPair> pairs;  // unrelated, origin = augmented
  bool exhausted = false;
};

/// Samples cross-component pairs uniformly, excluding `existing`, until
/// `count` pairs are drawn or the pool runs out. A single-component graph
/// with count > 0 has no candidates at all and raises NoUnrelatedCandidates.
SampledUnrelated sample_unrelated(const ConcreteGraph& graph, std::uint64_t count,
                                  std::uint64_t seed, const std::set<PairKey>& existing);

/// Annotated pairs plus balanced sampled related/unrelated pairs, shuffled by
/// the config seed. Sub-samplers run on seeds derived from config.seed, so a
/// given (graph, config) always yields the same output sequence.
std::pair<std::vector<LabeledPair>, AugmentReport> augment_dataset(
    const std::vector<LabeledPair>& train_pairs, const ConcreteGraph& graph,
    const AugmentConfig& config);

}  // namespace cgl
