#include "cgl/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cgl/errors.hpp"

namespace cgl {

Bm25Index build_bm25_index(const std::vector<std::vector<std::string>>& documents,
                           double k1, double k2, double b) {
  bool any_nonempty = false;
  for (const auto& d : documents) {
    if (!d.empty()) {
      any_nonempty = true;
      break;
    }
  }
  if (!any_nonempty) raise(Err::EmptyCorpus, "need at least one non-empty document");

  Bm25Index idx;
  idx.n_docs = documents.size();
  idx.k1 = k1;
  idx.k2 = k2;
  idx.b = b;
  idx.term_freq.reserve(documents.size());
  idx.doc_len.reserve(documents.size());
  std::size_t total_len = 0;
  for (const auto& d : documents) {
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : d) ++tf[t];
    for (const auto& [token, count] : tf) {
      (void)count;
      ++idx.doc_freq[token];
    }
    idx.doc_len.push_back(d.size());
    total_len += d.size();
    idx.term_freq.push_back(std::move(tf));
  }
  idx.avg_len = static_cast<double>(total_len) / static_cast<double>(idx.n_docs);
  return idx;
}

double bm25_score(const Bm25Index& index, std::size_t doc,
                  const std::vector<std::string>& query) {
  if (doc >= index.n_docs) raise(Err::UnknownDocument, "document index out of range");
  std::unordered_map<std::string, std::size_t> query_tf;
  for (const auto& t : query) ++query_tf[t];

  const auto& doc_tf = index.term_freq[doc];
  const double n_total = static_cast<double>(index.n_docs);
  const double len_ratio = static_cast<double>(index.doc_len[doc]) / index.avg_len;
  double score = 0.0;
  for (const auto& [token, qf] : query_tf) {
    const auto it = doc_tf.find(token);
    if (it == doc_tf.end()) continue;  // tf(q_i, d) = 0 zeroes the term
    const auto df_it = index.doc_freq.find(token);
    const double n_qi = df_it == index.doc_freq.end()
                            ? 0.0
                            : static_cast<double>(df_it->second);
    const double idf = std::log((n_total - n_qi + 0.5) / (n_qi + 0.5));
    const double tf_d = static_cast<double>(it->second);
    const double tf_q = static_cast<double>(qf);
    const double doc_factor =
        ((index.k1 + 1.0) * tf_d) /
        (index.k1 * (1.0 - index.b + index.b * len_ratio) + tf_d);
    const double query_factor = ((index.k2 + 1.0) * tf_q) / (index.k2 + tf_q);
    score += idf * doc_factor * query_factor;
  }
  return score;
}

namespace {

// min -> 0, max -> 1; a constant vector collapses to all zeros.
void min_max_normalize(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  for (auto& x : v) x = (x - lo) / (hi - lo);
}

}  // namespace

Bm25Scored bm25_score_pairs(const std::vector<LabeledPair>& pairs,
                            const ConceptStore& store, double k1, double k2,
                            double b) {
  if (pairs.empty()) raise(Err::EmptyCorpus, "no pairs to score");
  // Documents = [A1, B1, A2, B2, ...]; A_i at 2(i-1), B_i at 2i-1 (0-based).
  std::vector<std::vector<std::string>> documents;
  documents.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    documents.push_back(store.get(p.a_id).tokens);
    documents.push_back(store.get(p.b_id).tokens);
  }
  Bm25Index index = build_bm25_index(documents, k1, k2, b);

  Bm25Scored out;
  out.pairs = pairs;
  out.partner_ab.reserve(pairs.size());
  out.partner_ba.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t pos_a = 2 * i;
    const std::size_t pos_b = 2 * i + 1;
    std::vector<double> score_a(index.n_docs), score_b(index.n_docs);
    for (std::size_t d = 0; d < index.n_docs; ++d) {
      score_a[d] = bm25_score(index, d, documents[pos_a]);
      score_b[d] = bm25_score(index, d, documents[pos_b]);
      out.score_evaluations += 2;
    }
    min_max_normalize(score_a);
    min_max_normalize(score_b);
    out.partner_ab.push_back(score_a[pos_b]);
    out.partner_ba.push_back(score_b[pos_a]);
  }
  return out;
}

Bm25EstimateResult bm25_apply_threshold(const Bm25Scored& scored, double threshold,
                                        bool faithful) {
  if (threshold < 0.0 || threshold > 1.0) {
    raise(Err::InvalidThreshold, "threshold must lie in [0,1] after normalization");
  }
  Bm25EstimateResult out;
  out.faithful = faithful;
  for (std::size_t i = 0; i < scored.pairs.size(); ++i) {
    const LabeledPair& p = scored.pairs[i];
    const bool related = p.label == Label::related;
    for (int dir = 0; dir < 2; ++dir) {
      const double s = dir == 0 ? scored.partner_ab[i] : scored.partner_ba[i];
      Bm25Decision d;
      d.a_id = dir == 0 ? p.a_id : p.b_id;
      d.b_id = dir == 0 ? p.b_id : p.a_id;
      d.score = s;
      d.label = p.label;
      d.pred = s > threshold ? Label::related : Label::unrelated;
      d.correct = related ? (s > threshold) : (s < threshold);
      if (d.correct) ++out.predict_true;
      out.decisions.push_back(std::move(d));
    }
  }
  out.test_num = faithful ? scored.score_evaluations
                          : static_cast<std::uint64_t>(2 * scored.pairs.size());
  out.accuracy = out.test_num == 0
                     ? 0.0
                     : static_cast<double>(out.predict_true) /
                           static_cast<double>(out.test_num);
  return out;
}

Bm25EstimateResult bm25_estimate(const std::vector<LabeledPair>& pairs,
                                 const ConceptStore& store, double threshold,
                                 double k1, double k2, double b, bool faithful) {
  return bm25_apply_threshold(bm25_score_pairs(pairs, store, k1, k2, b), threshold,
                              faithful);
}

double tune_bm25_threshold(const Bm25Scored& scored, bool faithful) {
  // Candidate thresholds: every observed score plus midpoints between
  // neighbors, so both strict comparisons get exercised on each side.
  std::set<double> seen;
  for (double s : scored.partner_ab) seen.insert(s);
  for (double s : scored.partner_ba) seen.insert(s);
  std::vector<double> candidates(seen.begin(), seen.end());
  std::vector<double> grid;
  grid.push_back(0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    grid.push_back(candidates[i]);
    if (i + 1 < candidates.size()) {
      grid.push_back(0.5 * (candidates[i] + candidates[i + 1]));
    }
  }
  grid.push_back(1.0);

  double best_t = 0.0;
  double best_acc = -1.0;
  for (double t : grid) {
    if (t < 0.0 || t > 1.0) continue;
    const auto r = bm25_apply_threshold(scored, t, faithful);
    if (r.accuracy > best_acc) {
      best_acc = r.accuracy;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace cgl
