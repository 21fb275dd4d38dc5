#include "cgl/lda.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cgl/errors.hpp"
#include "cgl/rng.hpp"

namespace cgl {

namespace {

std::size_t sample_from_weights(const std::vector<double>& w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  const double u = rng.unit_double() * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    cum += w[k];
    if (u < cum) return k;
  }
  return w.size() - 1;  // guards rounding at the top end
}

}  // namespace

LdaModel train_lda(const std::vector<std::vector<std::string>>& documents,
                   std::size_t K, std::size_t iterations, double a_dirichlet,
                   double b_dirichlet, std::uint64_t seed) {
  if (K < 2) raise(Err::InvalidTopicCount, "topic count must be at least 2");
  if (a_dirichlet <= 0.0 || b_dirichlet <= 0.0) {
    raise(Err::InvalidConfig, "Dirichlet priors must be positive");
  }

  LdaModel model;
  model.K = K;
  model.a_dirichlet = a_dirichlet;
  model.b_dirichlet = b_dirichlet;
  model.seed = seed;

  std::set<std::string> uniq;
  for (const auto& d : documents) uniq.insert(d.begin(), d.end());
  if (uniq.empty()) raise(Err::EmptyCorpus, "no tokens to model");
  model.vocab.assign(uniq.begin(), uniq.end());
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    model.vocab_index[model.vocab[i]] = i;
  }
  const std::size_t v_size = model.vocab.size();

  std::vector<std::vector<std::size_t>> word_ids(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    word_ids[d].reserve(documents[d].size());
    for (const auto& t : documents[d]) {
      word_ids[d].push_back(model.vocab_index.at(t));
    }
  }

  model.topic_word.assign(K, std::vector<std::uint32_t>(v_size, 0));
  model.topic_totals.assign(K, 0);
  std::vector<std::vector<std::uint32_t>> doc_topic(documents.size(),
                                                    std::vector<std::uint32_t>(K, 0));
  std::vector<std::vector<std::uint8_t>> z(documents.size());

  Rng rng(seed);
  for (std::size_t d = 0; d < documents.size(); ++d) {
    z[d].resize(word_ids[d].size());
    for (std::size_t t = 0; t < word_ids[d].size(); ++t) {
      const std::size_t k = rng.bounded(K);
      z[d][t] = static_cast<std::uint8_t>(k);
      ++doc_topic[d][k];
      ++model.topic_word[k][word_ids[d][t]];
      ++model.topic_totals[k];
    }
  }

  const double vb = static_cast<double>(v_size) * b_dirichlet;
  std::vector<double> weights(K);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t d = 0; d < documents.size(); ++d) {
      for (std::size_t t = 0; t < word_ids[d].size(); ++t) {
        const std::size_t w = word_ids[d][t];
        const std::size_t old_k = z[d][t];
        --doc_topic[d][old_k];
        --model.topic_word[old_k][w];
        --model.topic_totals[old_k];
        for (std::size_t k = 0; k < K; ++k) {
          weights[k] = (doc_topic[d][k] + a_dirichlet) *
                       (model.topic_word[k][w] + b_dirichlet) /
                       (static_cast<double>(model.topic_totals[k]) + vb);
        }
        const std::size_t new_k = sample_from_weights(weights, rng);
        z[d][t] = static_cast<std::uint8_t>(new_k);
        ++doc_topic[d][new_k];
        ++model.topic_word[new_k][w];
        ++model.topic_totals[new_k];
      }
    }
  }
  return model;
}

TopicDistribution topic_distribution(const LdaModel& model,
                                     const std::vector<std::string>& tokens,
                                     std::size_t sweeps, std::uint64_t seed_tag) {
  TopicDistribution out;
  std::vector<std::size_t> word_ids;
  word_ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto it = model.vocab_index.find(t);
    if (it != model.vocab_index.end()) word_ids.push_back(it->second);
  }
  if (word_ids.empty()) {
    out.p.assign(model.K, 1.0 / static_cast<double>(model.K));
    out.oov_fallback = true;
    return out;
  }

  Rng rng(model.seed ^ (0x9e3779b97f4a7c15ULL * (seed_tag + 1)));
  std::vector<std::uint32_t> local(model.K, 0);
  std::vector<std::uint8_t> z(word_ids.size());
  for (std::size_t t = 0; t < word_ids.size(); ++t) {
    const std::size_t k = rng.bounded(model.K);
    z[t] = static_cast<std::uint8_t>(k);
    ++local[k];
  }

  const double vb = static_cast<double>(model.vocab.size()) * model.b_dirichlet;
  std::vector<double> weights(model.K);
  for (std::size_t it = 0; it < sweeps; ++it) {
    for (std::size_t t = 0; t < word_ids.size(); ++t) {
      const std::size_t w = word_ids[t];
      const std::size_t old_k = z[t];
      --local[old_k];
      // Topic-word counts stay frozen: the document was never added to them.
      for (std::size_t k = 0; k < model.K; ++k) {
        weights[k] = (local[k] + model.a_dirichlet) *
                     (model.topic_word[k][w] + model.b_dirichlet) /
                     (static_cast<double>(model.topic_totals[k]) + vb);
      }
      const std::size_t new_k = sample_from_weights(weights, rng);
      z[t] = static_cast<std::uint8_t>(new_k);
      ++local[new_k];
    }
  }

  const double denom = static_cast<double>(word_ids.size()) +
                       static_cast<double>(model.K) * model.a_dirichlet;
  out.p.resize(model.K);
  for (std::size_t k = 0; k < model.K; ++k) {
    out.p[k] = (static_cast<double>(local[k]) + model.a_dirichlet) / denom;
  }
  return out;
}

double cosine_similarity(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) raise(Err::ShapeError, "vector dimension mismatch");
  const double nu = norm2(u);
  const double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) raise(Err::ZeroVector, "cosine of a zero vector");
  return dot(u, v) / (nu * nv);
}

LdaEstimateResult lda_estimate(const std::vector<LabeledPair>& pairs,
                               const ConceptStore& store, const LdaModel& model,
                               double threshold) {
  LdaEstimateResult out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const LabeledPair& p = pairs[i];
    const auto dist_c =
        topic_distribution(model, store.get(p.a_id).tokens, 50, 2 * i);
    const auto dist_d =
        topic_distribution(model, store.get(p.b_id).tokens, 50, 2 * i + 1);
    const double sim = cosine_similarity(dist_c.p, dist_d.p);

    LdaDecision d;
    d.a_id = p.a_id;
    d.b_id = p.b_id;
    d.score = sim;
    d.label = p.label;
    d.pred = sim >= threshold ? Label::related : Label::unrelated;
    d.correct = d.pred == d.label;
    if (d.correct) ++out.predict_true;
    out.decisions.push_back(std::move(d));
    ++out.test_num;
  }
  out.accuracy = out.test_num == 0 ? 0.0
                                   : static_cast<double>(out.predict_true) /
                                         static_cast<double>(out.test_num);
  return out;
}

}  // namespace cgl
