#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgl/corpus.hpp"
#include "cgl/vecmath.hpp"

namespace cgl {

struct LdaModel {
  std::size_t K = 0;
  std::vector<std::string> vocab;  // index -> token, sorted
  std::unordered_map<std::string, std::size_t> vocab_index;
  std::vector<std::vector<std::uint32_t>> topic_word;  // K x V counts
  std::vector<std::uint64_t> topic_totals;
  double a_dirichlet = 0.0;  // document-topic prior
  double b_dirichlet = 0.0;  // topic-word prior
  std::uint64_t seed = 0;
};

// Collapsed Gibbs sampling over the given documents; counts come from the
// final sweep. Deterministic per seed.
LdaModel train_lda(const std::vector<std::vector<std::string>>& documents,
                   std::size_t K, std::size_t iterations, double a_dirichlet,
                   double b_dirichlet, std::uint64_t seed);

struct TopicDistribution {
  Vec p;                      // K-simplex
  bool oov_fallback = false;  // no in-vocabulary token survived
};

// Held-out inference: Gibbs sweeps against frozen topic-word counts, then
// smoothed normalized proportions. seed_tag varies the chain per document.
TopicDistribution topic_distribution(const LdaModel& model,
                                     const std::vector<std::string>& tokens,
                                     std::size_t sweeps = 50,
                                     std::uint64_t seed_tag = 0);

double cosine_similarity(const Vec& u, const Vec& v);

struct LdaDecision {
  std::string a_id, b_id;
  double score = 0.0;  // cosine similarity of topic distributions
  Label pred = Label::unrelated;
  Label label = Label::unrelated;
  bool correct = false;
};

struct LdaEstimateResult {
  double accuracy = 0.0;
  std::uint64_t predict_true = 0;
  std::uint64_t test_num = 0;  // = pair count
  std::vector<LdaDecision> decisions;
};

// Related is predicted when similarity >= threshold.
LdaEstimateResult lda_estimate(const std::vector<LabeledPair>& pairs,
                               const ConceptStore& store, const LdaModel& model,
                               double threshold);

}  // namespace cgl
