#include "cgl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgl/errors.hpp"
#include "cgl/rng.hpp"

namespace cgl {

double concentration_phi(const std::vector<Embedding>& member_embeddings,
                         const Embedding& component_embedding, double alpha,
                         double phi_floor) {
  if (member_embeddings.empty()) raise(Err::EmptyGraph, "component has no members");
  double sum = 0.0;
  for (const auto& m : member_embeddings) {
    if (m.v.size() != component_embedding.v.size()) {
      raise(Err::ShapeError, "member/component dimension mismatch");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < m.v.size(); ++i) {
      const double d = m.v[i] - component_embedding.v[i];
      sq += d * d;
    }
    sum += std::sqrt(sq);
  }
  const double p = static_cast<double>(member_embeddings.size());
  const double raw = sum / (p * std::log(p + alpha));
  return std::max(raw, phi_floor);
}

namespace {

// Stabilized -log softmax_own over the given logits plus, optionally, the
// softmax probabilities for the gradient path.
double neg_log_softmax(const std::vector<double>& logits, std::size_t own,
                       std::vector<double>* probs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double l : logits) m = std::max(m, l);
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - m);
  const double lse = m + std::log(denom);
  if (probs) {
    probs->resize(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      (*probs)[j] = std::exp(logits[j] - m) / denom;
    }
  }
  return lse - logits[own];
}

}  // namespace

double gc_nce_concept_loss(const Vec& u, std::size_t own_component,
                           const EpochSnapshot& snapshot, Vec* d_u) {
  const std::size_t r = snapshot.component_embeddings.size();
  if (r == 0) raise(Err::EmptyGraph, "snapshot has no components");
  if (own_component >= r) raise(Err::ShapeError, "component index out of range");

  std::vector<double> logits(r);
  for (std::size_t j = 0; j < r; ++j) {
    logits[j] = dot(u, snapshot.component_embeddings[j].v) / snapshot.phis[j];
  }
  std::vector<double> probs;
  const double loss = neg_log_softmax(logits, own_component, d_u ? &probs : nullptr);
  if (d_u) {
    for (std::size_t j = 0; j < r; ++j) {
      const double w =
          (probs[j] - (j == own_component ? 1.0 : 0.0)) / snapshot.phis[j];
      axpy(w, snapshot.component_embeddings[j].v, *d_u);
    }
  }
  return loss;
}

double gc_nce_concept_loss_sampled(const Vec& u, std::size_t own_component,
                                   const EpochSnapshot& snapshot,
                                   std::size_t max_negatives, Rng& rng, Vec* d_u) {
  const std::size_t r = snapshot.component_embeddings.size();
  if (r == 0) raise(Err::EmptyGraph, "snapshot has no components");
  if (max_negatives == 0 || r <= max_negatives + 1) {
    return gc_nce_concept_loss(u, own_component, snapshot, d_u);
  }
  // Sample negatives without replacement from the other components.
  std::vector<std::size_t> others;
  others.reserve(r - 1);
  for (std::size_t j = 0; j < r; ++j) {
    if (j != own_component) others.push_back(j);
  }
  for (std::size_t i = 0; i < max_negatives; ++i) {
    const std::size_t j = i + rng.bounded(others.size() - i);
    std::swap(others[i], others[j]);
  }
  others.resize(max_negatives);
  std::vector<std::size_t> chosen;
  chosen.reserve(max_negatives + 1);
  chosen.push_back(own_component);
  chosen.insert(chosen.end(), others.begin(), others.end());

  std::vector<double> logits(chosen.size());
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const std::size_t j = chosen[k];
    logits[k] = dot(u, snapshot.component_embeddings[j].v) / snapshot.phis[j];
  }
  std::vector<double> probs;
  const double loss = neg_log_softmax(logits, 0, d_u ? &probs : nullptr);
  if (d_u) {
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const std::size_t j = chosen[k];
      const double w = (probs[k] - (k == 0 ? 1.0 : 0.0)) / snapshot.phis[j];
      axpy(w, snapshot.component_embeddings[j].v, *d_u);
    }
  }
  return loss;
}

GcNceResult gc_nce_loss(const std::vector<Embedding>& live_embeddings,
                        const std::vector<std::size_t>& component_assignment,
                        const EpochSnapshot& snapshot,
                        std::vector<Vec>* d_live) {
  if (live_embeddings.size() != component_assignment.size()) {
    raise(Err::ShapeError, "embedding/assignment length mismatch");
  }
  if (snapshot.component_embeddings.size() != snapshot.phis.size()) {
    raise(Err::ShapeError, "snapshot component/phi length mismatch");
  }
  GcNceResult out;
  out.per_concept.reserve(live_embeddings.size());
  if (d_live) {
    d_live->assign(live_embeddings.size(), Vec());
  }
  for (std::size_t i = 0; i < live_embeddings.size(); ++i) {
    Vec* grad = nullptr;
    if (d_live) {
      (*d_live)[i].assign(live_embeddings[i].v.size(), 0.0);
      grad = &(*d_live)[i];
    }
    const double l = gc_nce_concept_loss(live_embeddings[i].v,
                                         component_assignment[i], snapshot, grad);
    out.per_concept.push_back(l);
    out.total += l;
  }
  return out;
}

MoCoQueue::MoCoQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) raise(Err::InvalidConfig, "queue capacity must be positive");
}

void MoCoQueue::push(const Embedding& key) {
  const double n = norm2(key.v);
  if (std::abs(n - 1.0) > 1e-6) {
    raise(Err::NumericalError, "queue key is not unit-norm");
  }
  entries_.push_back(key.v);
  while (entries_.size() > capacity_) entries_.pop_front();
}

double moco_loss(const Embedding& query, const Embedding& positive_key,
                 const MoCoQueue& queue, double tau, Vec* d_query) {
  if (tau <= 0.0) raise(Err::InvalidConfig, "temperature must be positive");
  if (query.v.size() != positive_key.v.size()) {
    raise(Err::ShapeError, "query/key dimension mismatch");
  }
  std::vector<double> logits;
  logits.reserve(1 + queue.size());
  logits.push_back(dot(query.v, positive_key.v) / tau);
  for (const auto& neg : queue.entries()) {
    if (neg.size() != query.v.size()) {
      raise(Err::ShapeError, "queue entry dimension mismatch");
    }
    logits.push_back(dot(query.v, neg) / tau);
  }
  std::vector<double> probs;
  const double loss = neg_log_softmax(logits, 0, d_query ? &probs : nullptr);
  if (d_query) {
    axpy((probs[0] - 1.0) / tau, positive_key.v, *d_query);
    std::size_t k = 1;
    for (const auto& neg : queue.entries()) {
      axpy(probs[k] / tau, neg, *d_query);
      ++k;
    }
  }
  return loss;
}

Vec cre_features(const Embedding& a, const Embedding& b) {
  if (a.v.size() != b.v.size()) {
    raise(Err::ShapeError, "pair embeddings have different dimensions");
  }
  const std::size_t d = a.v.size();
  Vec h(3 * d);
  for (std::size_t i = 0; i < d; ++i) {
    h[i] = a.v[i];
    h[d + i] = b.v[i];
    h[2 * d + i] = std::abs(a.v[i] - b.v[i]);
  }
  return h;
}

void cre_features_backward(const Embedding& a, const Embedding& b,
                           const Vec& d_features, Vec& d_a, Vec& d_b) {
  const std::size_t d = a.v.size();
  if (d_features.size() != 3 * d || b.v.size() != d) {
    raise(Err::ShapeError, "feature gradient dimension mismatch");
  }
  if (d_a.size() != d) d_a.assign(d, 0.0);
  if (d_b.size() != d) d_b.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a.v[i] - b.v[i];
    const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    d_a[i] += d_features[i] + s * d_features[2 * d + i];
    d_b[i] += d_features[d + i] - s * d_features[2 * d + i];
  }
}

ClassifierHead ClassifierHead::zeros(std::size_t d_out) {
  ClassifierHead h;
  h.W.assign(3 * d_out, 0.0);
  return h;
}

CreResult cre_loss(const Vec& features, const ClassifierHead& head, int label,
                   Vec* d_W, Vec* d_features) {
  if (features.size() != head.W.size()) {
    raise(Err::ShapeError, "feature/classifier dimension mismatch");
  }
  if (label != 0 && label != 1) raise(Err::ParseError, "label must be 0 or 1");
  const double logit = dot(head.W, features);
  const double y = static_cast<double>(label);
  CreResult out;
  out.probability = 1.0 / (1.0 + std::exp(-logit));
  // max(z,0) - z*y + log(1 + e^{-|z|}) avoids overflow at either extreme.
  out.loss = std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
  const double d_logit = out.probability - y;
  if (d_W) {
    if (d_W->size() != head.W.size()) d_W->assign(head.W.size(), 0.0);
    axpy(d_logit, features, *d_W);
  }
  if (d_features) {
    if (d_features->size() != features.size()) d_features->assign(features.size(), 0.0);
    axpy(d_logit, head.W, *d_features);
  }
  return out;
}

double total_loss(double cre, double gc_nce, double moco, double beta) {
  return cre + beta * (gc_nce + moco);
}

}  // namespace cgl
