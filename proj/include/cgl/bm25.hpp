#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgl/corpus.hpp"

namespace cgl {

struct Bm25Index {
  std::size_t n_docs = 0;  // N
  double avg_len = 0.0;
  std::unordered_map<std::string, std::size_t> doc_freq;
  std::vector<std::unordered_map<std::string, std::size_t>> term_freq;
  std::vector<std::size_t> doc_len;
  double k1 = 1.2, k2 = 100.0, b = 0.75;
};

// Indexes the documents in the given order (duplicates stay distinct).
Bm25Index build_bm25_index(const std::vector<std::vector<std::string>>& documents,
                           double k1 = 1.2, double k2 = 100.0, double b = 0.75);

// Okapi-style score of document `doc` for the query token sequence:
// sum over distinct query tokens of IDF * doc-TF saturation * query-TF
// saturation (natural log IDF).
double bm25_score(const Bm25Index& index, std::size_t doc,
                  const std::vector<std::string>& query);

// Per-direction outcome: the query concept scored every document and the
// partner's min-max-normalized score was compared against the threshold.
struct Bm25Decision {
  std::string a_id;  // query side
  std::string b_id;  // partner side
  double score = 0.0;
  Label pred = Label::unrelated;
  Label label = Label::unrelated;
  bool correct = false;
};

// Threshold-free part of the relatedness harness: score both directions of
// every pair against the pair corpus and min-max normalize per query.
struct Bm25Scored {
  std::vector<LabeledPair> pairs;
  std::vector<double> partner_ab;  // normalized score of B_i in A_i's vector
  std::vector<double> partner_ba;
  std::uint64_t score_evaluations = 0;  // 2n * N, the count fed into testNum
};

Bm25Scored bm25_score_pairs(const std::vector<LabeledPair>& pairs,
                            const ConceptStore& store, double k1 = 1.2,
                            double k2 = 100.0, double b = 0.75);

struct Bm25EstimateResult {
  double accuracy = 0.0;
  std::uint64_t predict_true = 0;
  std::uint64_t test_num = 0;  // denominator actually used
  bool faithful = false;       // true: pseudocode accounting (2nN); false: 2n
  std::vector<Bm25Decision> decisions;  // two per pair, query order a then b
};

// Applies the threshold branch: related pairs need partner score > T in both
// directions, unrelated pairs need < T. A score equal to T counts as wrong in
// either branch (kept as the pseudocode has it); reported predictions use
// score > T.
Bm25EstimateResult bm25_apply_threshold(const Bm25Scored& scored, double threshold,
                                        bool faithful);

Bm25EstimateResult bm25_estimate(const std::vector<LabeledPair>& pairs,
                                 const ConceptStore& store, double threshold,
                                 double k1 = 1.2, double k2 = 100.0, double b = 0.75,
                                 bool faithful = false);

// Grid over the observed score set; returns the threshold maximizing accuracy
// (smallest such threshold on ties).
double tune_bm25_threshold(const Bm25Scored& scored, bool faithful);

}  // namespace cgl
