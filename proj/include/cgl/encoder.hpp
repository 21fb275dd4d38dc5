#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgl/corpus.hpp"
#include "cgl/vecmath.hpp"

namespace cgl {

/// Token -> row lookup. The last table row is a shared trainable UNK vector
/// for out-of-vocabulary tokens.
struct Vocab {
  std::vector<std::string> tokens;  // sorted unique
  std::unordered_map<std::string, std::size_t> index;

  static Vocab from_store(const ConceptStore& store);
  std::size_t unk_row() const { return tokens.size(); }
  std::size_t table_rows() const { return tokens.size() + 1; }
  std::size_t row_of(const std::string& token) const;
};

/// Mean-pooled token vectors, one linear projection, then l2-normalization.
struct EncoderParams {
  std::size_t d_in = 64;
  std::size_t d_out = 64;
  Matrix token_table;  // table_rows x d_in
  Matrix projection;   // d_out x d_in
};

struct Embedding {
  Vec v;
  bool normalized = false;
};

/// Intermediates of one encode, kept for the backward pass.
struct EncodeCache {
  std::vector<std::size_t> rows;  // token table row per token occurrence
  Vec mean;                       // d_in
  Vec z;                          // d_out, projection * mean
  double z_norm = 0.0;
  Vec u;                          // z / z_norm
};

/// Accumulated partials for every trainable parameter.
struct GradientTape {
  Matrix d_token_table;
  Matrix d_projection;
  Vec d_head;  // classifier weights, 3 * d_out

  static GradientTape zeros_like(const EncoderParams& params);
  void reset();
  bool all_finite() const;
};

/// Token vectors i.i.d. uniform in [-0.5/d_in, 0.5/d_in]; projection is an
/// identity-padded matrix.
EncoderParams init_params(const Vocab& vocab, std::size_t d_in, std::size_t d_out,
                          std::uint64_t seed);

Embedding encode_concept(const EncoderParams& params, const Vocab& vocab, const Concept& doc);
Embedding encode_concept_cached(const EncoderParams& params, const Vocab& vocab,
                                const Concept& doc, EncodeCache& cache);

/// Mean of member unit vectors, re-normalized.
Embedding encode_component(const std::vector<Embedding>& member_embeddings);

/// d(loss)/d(embedding) -> partials on token table and projection. The
/// normalization Jacobian is (I - u u^T) / ||z||.
void backprop_embedding(const EncoderParams& params, const EncodeCache& cache,
                        const Vec& d_embedding, GradientTape& tape);

/// theta_k <- m * theta_k + (1 - m) * theta_q (Polyak averaging); theta_q is
/// untouched and never receives gradient.
void momentum_update(EncoderParams& theta_k, const EncoderParams& theta_q, double m);

}  // namespace cgl
