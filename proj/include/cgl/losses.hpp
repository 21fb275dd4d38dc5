#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgl/encoder.hpp"
#include "cgl/vecmath.hpp"

namespace cgl {

class Rng;

// Per-component temperature scale estimated from member dispersion.
// phi = max( sum_i ||f(x_i) - f(c)||_2 / (p * log(p + alpha)), phi_floor )
double concentration_phi(const std::vector<Embedding>& member_embeddings,
                         const Embedding& component_embedding, double alpha,
                         double phi_floor);

// Embeddings frozen at the start of an epoch: targets for the component loss.
struct EpochSnapshot {
  std::unordered_map<std::string, Embedding> concept_embeddings;
  std::vector<Embedding> component_embeddings;
  std::vector<double> phis;
};

// Softmax cross-entropy of one concept against every component embedding,
// logits scaled by each component's concentration. Returns the loss; when
// d_u is non-null, accumulates the gradient w.r.t. the live unit embedding.
double gc_nce_concept_loss(const Vec& u, std::size_t own_component,
                           const EpochSnapshot& snapshot, Vec* d_u);

// Same loss restricted to {own} ∪ `max_negatives` sampled other components.
// Extension knob; with max_negatives == 0 it falls through to the full sum.
double gc_nce_concept_loss_sampled(const Vec& u, std::size_t own_component,
                                   const EpochSnapshot& snapshot,
                                   std::size_t max_negatives, Rng& rng, Vec* d_u);

struct GcNceResult {
  double total = 0.0;  // sum over concepts
  std::vector<double> per_concept;
};

// Batch form: one term per live embedding, component_assignment[i] gives its
// component index in the snapshot. Gradients (if requested) are w.r.t. the
// live embeddings only; snapshot quantities are constants.
GcNceResult gc_nce_loss(const std::vector<Embedding>& live_embeddings,
                        const std::vector<std::size_t>& component_assignment,
                        const EpochSnapshot& snapshot,
                        std::vector<Vec>* d_live = nullptr);

// Fixed-capacity FIFO of momentum-encoder key embeddings.
class MoCoQueue {
 public:
  explicit MoCoQueue(std::size_t capacity);
  void push(const Embedding& key);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Vec>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<Vec> entries_;
};

// InfoNCE over {positive} ∪ queue with temperature tau. No gradient flows to
// the keys; d_query (if non-null) receives the gradient w.r.t. the query.
double moco_loss(const Embedding& query, const Embedding& positive_key,
                 const MoCoQueue& queue, double tau, Vec* d_query = nullptr);

// Pair feature: f(a) ⊕ f(b) ⊕ |f(a) − f(b)|.
Vec cre_features(const Embedding& a, const Embedding& b);

// Splits an upstream gradient on the feature vector back onto both inputs.
// The absolute-difference block uses sign(a-b) with sign(0) = 0.
void cre_features_backward(const Embedding& a, const Embedding& b,
                           const Vec& d_features, Vec& d_a, Vec& d_b);

struct ClassifierHead {
  Vec W;  // 1 x 3*d_out, row as a flat vector
  double decision_threshold = 0.5;

  static ClassifierHead zeros(std::size_t d_out);
};

struct CreResult {
  double probability = 0.0;
  double loss = 0.0;
};

// p = sigmoid(W·h); binary cross entropy in log-space-stable form.
// d_W / d_features (if non-null) accumulate gradients.
CreResult cre_loss(const Vec& features, const ClassifierHead& head, int label,
                   Vec* d_W = nullptr, Vec* d_features = nullptr);

// L = cre + beta * (gc_nce + moco)
double total_loss(double cre, double gc_nce, double moco, double beta);

}  // namespace cgl
