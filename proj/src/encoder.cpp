#include "cgl/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cgl/errors.hpp"
#include "cgl/rng.hpp"

namespace cgl {

namespace {
constexpr double kDegenerateNorm = 1e-12;
}

Vocab Vocab::from_store(const ConceptStore& store) {
  std::set<std::string> uniq;
  for (const auto& c : store.concepts()) {
    uniq.insert(c.tokens.begin(), c.tokens.end());
  }
  Vocab v;
  v.tokens.assign(uniq.begin(), uniq.end());
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.index[v.tokens[i]] = i;
  return v;
}

std::size_t Vocab::row_of(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? unk_row() : it->second;
}

EncoderParams init_params(const Vocab& vocab, std::size_t d_in, std::size_t d_out,
                          std::uint64_t seed) {
  if (d_out < 2) raise(Err::InvalidConfig, "d_out must be >= 2");
  EncoderParams p;
  p.d_in = d_in;
  p.d_out = d_out;
  p.token_table = Matrix(vocab.table_rows(), d_in);
  Rng rng(seed);
  const double half = 0.5 / static_cast<double>(d_in);
  for (auto& x : p.token_table.data) x = (rng.unit_double() * 2.0 - 1.0) * half;
  p.projection = Matrix(d_out, d_in);
  for (std::size_t i = 0; i < std::min(d_out, d_in); ++i) p.projection.at(i, i) = 1.0;
  return p;
}

Embedding encode_concept_cached(const EncoderParams& params, const Vocab& vocab,
                                const Concept& doc, EncodeCache& cache) {
  if (doc.tokens.empty()) {
    raise(Err::EmptyConcept, "concept '" + doc.id + "' has no tokens");
  }
  cache.rows.clear();
  cache.rows.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) cache.rows.push_back(vocab.row_of(t));

  cache.mean.assign(params.d_in, 0.0);
  for (std::size_t r : cache.rows) {
    const double* row = params.token_table.row(r);
    for (std::size_t c = 0; c < params.d_in; ++c) cache.mean[c] += row[c];
  }
  const double inv_n = 1.0 / static_cast<double>(cache.rows.size());
  for (auto& x : cache.mean) x *= inv_n;

  cache.z = matvec(params.projection, cache.mean);
  cache.z_norm = norm2(cache.z);
  if (cache.z_norm < kDegenerateNorm) {
    raise(Err::NormalizationDegenerate,
          "concept '" + doc.id + "' encodes to a zero vector");
  }
  cache.u = cache.z;
  for (auto& x : cache.u) x /= cache.z_norm;
  return Embedding{cache.u, true};
}

Embedding encode_concept(const EncoderParams& params, const Vocab& vocab,
                         const Concept& doc) {
  EncodeCache cache;
  return encode_concept_cached(params, vocab, doc, cache);
}

Embedding encode_component(const std::vector<Embedding>& member_embeddings) {
  if (member_embeddings.empty()) {
    raise(Err::EmptyGraph, "component has no member embeddings");
  }
  const std::size_t d = member_embeddings.front().v.size();
  Vec mean(d, 0.0);
  for (const auto& e : member_embeddings) {
    if (e.v.size() != d) raise(Err::ShapeError, "member embedding dimension mismatch");
    axpy(1.0, e.v, mean);
  }
  for (auto& x : mean) x /= static_cast<double>(member_embeddings.size());
  double n = norm2(mean);
  if (n < kDegenerateNorm) {
    raise(Err::NormalizationDegenerate, "component mean has zero norm");
  }
  for (auto& x : mean) x /= n;
  return Embedding{std::move(mean), true};
}

GradientTape GradientTape::zeros_like(const EncoderParams& params) {
  GradientTape t;
  t.d_token_table = Matrix(params.token_table.rows, params.token_table.cols);
  t.d_projection = Matrix(params.projection.rows, params.projection.cols);
  t.d_head.assign(3 * params.d_out, 0.0);
  return t;
}

void GradientTape::reset() {
  d_token_table.fill(0.0);
  d_projection.fill(0.0);
  std::fill(d_head.begin(), d_head.end(), 0.0);
}

bool GradientTape::all_finite() const {
  for (double x : d_token_table.data)
    if (!std::isfinite(x)) return false;
  for (double x : d_projection.data)
    if (!std::isfinite(x)) return false;
  return cgl::all_finite(d_head);
}

void backprop_embedding(const EncoderParams& params, const EncodeCache& cache,
                        const Vec& d_embedding, GradientTape& tape) {
  if (d_embedding.size() != params.d_out) {
    raise(Err::ShapeError, "upstream gradient dimension mismatch");
  }
  // Through u = z / ||z||:  dz = (dU - (u . dU) u) / ||z||
  const double proj = dot(cache.u, d_embedding);
  Vec dz(params.d_out);
  for (std::size_t i = 0; i < params.d_out; ++i) {
    dz[i] = (d_embedding[i] - proj * cache.u[i]) / cache.z_norm;
  }
  // Through z = P * mean
  for (std::size_t r = 0; r < params.d_out; ++r) {
    double* grad_row = tape.d_projection.row(r);
    for (std::size_t c = 0; c < params.d_in; ++c) grad_row[c] += dz[r] * cache.mean[c];
  }
  Vec dmean = matvec_t(params.projection, dz);
  // Through the mean pool: each occurrence takes 1/n of the gradient.
  const double inv_n = 1.0 / static_cast<double>(cache.rows.size());
  for (std::size_t r : cache.rows) {
    double* grad_row = tape.d_token_table.row(r);
    for (std::size_t c = 0; c < params.d_in; ++c) grad_row[c] += dmean[c] * inv_n;
  }
}

void momentum_update(EncoderParams& theta_k, const EncoderParams& theta_q, double m) {
  if (!theta_k.token_table.same_shape(theta_q.token_table) ||
      !theta_k.projection.same_shape(theta_q.projection)) {
    raise(Err::ShapeError, "momentum update between mismatched encoders");
  }
  const double one_minus = 1.0 - m;
  for (std::size_t i = 0; i < theta_k.token_table.data.size(); ++i) {
    theta_k.token_table.data[i] =
        m * theta_k.token_table.data[i] + one_minus * theta_q.token_table.data[i];
  }
  for (std::size_t i = 0; i < theta_k.projection.data.size(); ++i) {
    theta_k.projection.data[i] =
        m * theta_k.projection.data[i] + one_minus * theta_q.projection.data[i];
  }
}

}  // namespace cgl
