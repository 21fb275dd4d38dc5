#include "cgl/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cgl/errors.hpp"
#include "cgl/metrics.hpp"
#include "cgl/rng.hpp"

namespace cgl {

Ablation ablation_from_string(const std::string& name) {
  if (name == "full") return Ablation::full;
  if (name == "gc_only") return Ablation::gc_only;
  if (name == "moco_only") return Ablation::moco_only;
  if (name == "cre_only") return Ablation::cre_only;
  raise(Err::InvalidConfig, "unknown ablation '" + name + "'");
}

const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::gc_only: return "gc_only";
    case Ablation::moco_only: return "moco_only";
    case Ablation::cre_only: return "cre_only";
  }
  return "full";
}

void TrainConfig::validate() const {
  if (tau <= 0.0) raise(Err::InvalidConfig, "tau must be positive");
  if (momentum < 0.0 || momentum >= 1.0) raise(Err::InvalidConfig, "momentum must be in [0,1)");
  if (beta < 0.0) raise(Err::InvalidConfig, "beta must be nonnegative");
  if (alpha <= 0.0) raise(Err::InvalidConfig, "alpha must be positive");
  if (queue_size == 0) raise(Err::InvalidConfig, "queue_size must be positive");
  if (epochs == 0) raise(Err::InvalidConfig, "epochs must be positive");
  if (lr <= 0.0) raise(Err::InvalidConfig, "lr must be positive");
  if (adam_eps <= 0.0) raise(Err::InvalidConfig, "adam_eps must be positive");
  if (phi_floor <= 0.0) raise(Err::InvalidConfig, "phi_floor must be positive");
  if (d_out < 2) raise(Err::InvalidConfig, "d_out must be >= 2");
  if (batch_pairs == 0) raise(Err::InvalidConfig, "batch_pairs must be positive");
}

EpochSnapshot make_epoch_snapshot(const EncoderParams& params, const Vocab& vocab,
                                  const ConceptStore& store, const ConcreteGraph& graph,
                                  double alpha, double phi_floor) {
  EpochSnapshot snap;
  snap.concept_embeddings.reserve(graph.node_count());
  for (const auto& id : graph.node_ids()) {
    snap.concept_embeddings.emplace(id, encode_concept(params, vocab, store.get(id)));
  }
  snap.component_embeddings.reserve(graph.components().size());
  snap.phis.reserve(graph.components().size());
  for (const auto& comp : graph.components()) {
    std::vector<Embedding> members;
    members.reserve(comp.member_ids.size());
    for (const auto& id : comp.member_ids) {
      members.push_back(snap.concept_embeddings.at(id));
    }
    Embedding ce = encode_component(members);
    snap.phis.push_back(concentration_phi(members, ce, alpha, phi_floor));
    snap.component_embeddings.push_back(std::move(ce));
  }
  return snap;
}

namespace {

struct AdamState {
  Vec m, v;
  void ensure(std::size_t n) {
    if (m.size() != n) {
      m.assign(n, 0.0);
      v.assign(n, 0.0);
    }
  }
};

struct AdamW {
  double b1, b2, eps, wd;
  std::uint64_t t = 0;
  AdamState table, proj, head;

  void apply(double lr_t, double bc1, double bc2, Vec& p, const Vec& g, AdamState& s) {
    s.ensure(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      s.m[i] = b1 * s.m[i] + (1.0 - b1) * g[i];
      s.v[i] = b2 * s.v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      p[i] -= lr_t * (mhat / (std::sqrt(vhat) + eps) + wd * p[i]);
    }
  }

  void step(double lr_t, EncoderParams& theta, ClassifierHead& cls, const GradientTape& g) {
    ++t;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
    apply(lr_t, bc1, bc2, theta.token_table.data, g.d_token_table.data, table);
    apply(lr_t, bc1, bc2, theta.projection.data, g.d_projection.data, proj);
    apply(lr_t, bc1, bc2, cls.W, g.d_head, head);
  }
};

struct ConceptPass {
  EncodeCache cache;
  Embedding emb;
  Embedding key;
  std::size_t component = 0;
  Vec d_u;
};

double head_probability(const ClassifierHead& head, const Vec& features) {
  return 1.0 / (1.0 + std::exp(-dot(head.W, features)));
}

}  // namespace

TrainResult train(const ConceptStore& store, const DatasetSplit& split,
                  const ConcreteGraph& graph, const TrainConfig& config,
                  Ablation ablation, const StepObserver& observer) {
  config.validate();
  if (split.train.empty()) raise(Err::InsufficientData, "no training pairs");

  Vocab vocab = Vocab::from_store(store);
  EncoderParams theta = init_params(vocab, config.d_in, config.d_out, config.seed);
  EncoderParams theta_k = theta;
  ClassifierHead head = ClassifierHead::zeros(config.d_out);

  const bool gc_on = (ablation == Ablation::full || ablation == Ablation::gc_only) &&
                     config.beta != 0.0;
  const bool moco_on = (ablation == Ablation::full || ablation == Ablation::moco_only) &&
                       config.beta != 0.0;

  MoCoQueue queue(config.queue_size);
  AdamW opt{config.adam_beta1, config.adam_beta2, config.adam_eps, config.weight_decay,
            0, {}, {}, {}};
  GradientTape tape = GradientTape::zeros_like(theta);

  const std::size_t n_pairs = split.train.size();
  const std::size_t batches_per_epoch = (n_pairs + config.batch_pairs - 1) / config.batch_pairs;
  const std::size_t total_steps = config.epochs * batches_per_epoch;

  Rng shuffle_rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  Rng gc_rng(config.seed ^ 0x94d049bb133111ebULL);

  std::vector<std::size_t> order(n_pairs);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochSnapshot snap =
        make_epoch_snapshot(theta, vocab, store, graph, config.alpha, config.phi_floor);
    shuffle_rng.shuffle(order);

    double epoch_cre = 0.0, epoch_gc = 0.0, epoch_moco = 0.0;

    for (std::size_t start = 0; start < n_pairs; start += config.batch_pairs) {
      const std::size_t bp = std::min(config.batch_pairs, n_pairs - start);
      const double inv_pairs = 1.0 / static_cast<double>(bp);
      const double contrast_w = config.beta / (2.0 * static_cast<double>(bp));

      tape.reset();
      Vec d_head_sum(head.W.size(), 0.0);
      std::vector<ConceptPass> passes;
      passes.reserve(2 * bp);

      for (std::size_t i = 0; i < bp; ++i) {
        const LabeledPair& pair = split.train[order[start + i]];
        const Concept& ca = store.get(pair.a_id);
        const Concept& cb = store.get(pair.b_id);

        ConceptPass pa, pb;
        pa.emb = encode_concept_cached(theta, vocab, ca, pa.cache);
        pb.emb = encode_concept_cached(theta, vocab, cb, pb.cache);
        pa.key = encode_concept(theta_k, vocab, ca);
        pb.key = encode_concept(theta_k, vocab, cb);
        pa.component = graph.component_of_id(pair.a_id);
        pb.component = graph.component_of_id(pair.b_id);
        pa.d_u.assign(config.d_out, 0.0);
        pb.d_u.assign(config.d_out, 0.0);

        Vec features = cre_features(pa.emb, pb.emb);
        Vec d_features(features.size(), 0.0);
        CreResult cre = cre_loss(features, head, static_cast<int>(pair.label),
                                 &d_head_sum, &d_features);
        epoch_cre += cre.loss;
        Vec d_a(config.d_out, 0.0), d_b(config.d_out, 0.0);
        cre_features_backward(pa.emb, pb.emb, d_features, d_a, d_b);
        axpy(inv_pairs, d_a, pa.d_u);
        axpy(inv_pairs, d_b, pb.d_u);

        passes.push_back(std::move(pa));
        passes.push_back(std::move(pb));
      }

      for (auto& pass : passes) {
        if (gc_on) {
          Vec d_gc(config.d_out, 0.0);
          const double l = gc_nce_concept_loss_sampled(
              pass.emb.v, pass.component, snap, config.gc_negatives, gc_rng, &d_gc);
          epoch_gc += l;
          axpy(contrast_w, d_gc, pass.d_u);
        }
        if (moco_on) {
          Vec d_q(config.d_out, 0.0);
          const double l = moco_loss(pass.emb, pass.key, queue, config.tau, &d_q);
          epoch_moco += l;
          axpy(contrast_w, d_q, pass.d_u);
        }
      }

      axpy(inv_pairs, d_head_sum, tape.d_head);
      for (const auto& pass : passes) {
        backprop_embedding(theta, pass.cache, pass.d_u, tape);
      }
      if (!tape.all_finite()) {
        raise(Err::NumericalError,
              "non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                  std::to_string(start / config.batch_pairs));
      }

      const double lr_t =
          config.lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
      ++step;
      opt.step(lr_t, theta, head, tape);
      for (const auto& pass : passes) queue.push(pass.key);
      momentum_update(theta_k, theta, config.momentum);
      if (observer) observer(step, theta, theta_k);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.cre = epoch_cre / static_cast<double>(n_pairs);
    rec.gc_nce = gc_on ? epoch_gc / (2.0 * static_cast<double>(n_pairs)) : 0.0;
    rec.moco = moco_on ? epoch_moco / (2.0 * static_cast<double>(n_pairs)) : 0.0;
    rec.train_loss = total_loss(rec.cre, rec.gc_nce, rec.moco, config.beta);

    if (!split.dev.empty()) {
      std::vector<Label> preds, labels;
      std::vector<double> scores;
      preds.reserve(split.dev.size());
      labels.reserve(split.dev.size());
      scores.reserve(split.dev.size());
      for (const auto& pair : split.dev) {
        Prediction pr = predict(theta, vocab, head, store.get(pair.a_id), store.get(pair.b_id));
        preds.push_back(pr.label);
        labels.push_back(pair.label);
        scores.push_back(pr.probability);
      }
      MetricsReport m = metrics(confusion(preds, labels));
      rec.dev_accuracy = m.accuracy;
      rec.dev_f1 = m.f1;
      const bool has_pos = std::count(labels.begin(), labels.end(), Label::related) > 0;
      const bool has_neg = std::count(labels.begin(), labels.end(), Label::unrelated) > 0;
      if (has_pos && has_neg) rec.dev_auc = roc_auc(scores, labels);
    }
    result.log.push_back(rec);
  }

  result.checkpoint.params = std::move(theta);
  result.checkpoint.params_k = std::move(theta_k);
  result.checkpoint.head = std::move(head);
  result.checkpoint.vocab = std::move(vocab);
  return result;
}

Prediction predict(const EncoderParams& params, const Vocab& vocab,
                   const ClassifierHead& head, const Concept& a, const Concept& b,
                   bool symmetrize) {
  const Embedding ea = encode_concept(params, vocab, a);
  const Embedding eb = encode_concept(params, vocab, b);
  double p = head_probability(head, cre_features(ea, eb));
  if (symmetrize) {
    p = 0.5 * (p + head_probability(head, cre_features(eb, ea)));
  }
  Prediction out;
  out.probability = p;
  out.label = p >= head.decision_threshold ? Label::related : Label::unrelated;
  return out;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) raise(Err::ParseError, "matrix must be a nonempty array");
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = rows[0].size();
  Matrix m(n_rows, n_cols);
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (rows[r].size() != n_cols) raise(Err::ParseError, "ragged matrix rows");
    for (std::size_t c = 0; c < n_cols; ++c) m.at(r, c) = rows[r][c].get<double>();
  }
  return m;
}

nlohmann::json encoder_to_json(const EncoderParams& p) {
  return {{"token_table", matrix_to_json(p.token_table)},
          {"projection", matrix_to_json(p.projection)}};
}

EncoderParams encoder_from_json(const nlohmann::json& j, std::size_t d_in, std::size_t d_out) {
  EncoderParams p;
  p.d_in = d_in;
  p.d_out = d_out;
  p.token_table = matrix_from_json(j.at("token_table"));
  p.projection = matrix_from_json(j.at("projection"));
  if (p.projection.rows != d_out || p.projection.cols != d_in ||
      p.token_table.cols != d_in) {
    raise(Err::ParseError, "checkpoint dimensions are inconsistent");
  }
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json j;
  j["d_in"] = ckpt.params.d_in;
  j["d_out"] = ckpt.params.d_out;
  j["vocab"] = ckpt.vocab.tokens;
  j["theta"] = encoder_to_json(ckpt.params);
  j["theta_k"] = encoder_to_json(ckpt.params_k);
  j["head"] = {{"W", ckpt.head.W}, {"decision_threshold", ckpt.head.decision_threshold}};
  std::ofstream out(path);
  if (!out) raise(Err::IoError, "cannot write checkpoint to " + path);
  out << j.dump(2) << "\n";
  if (!out) raise(Err::IoError, "failed writing checkpoint to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Err::IoError, "cannot read checkpoint from " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(Err::ParseError, std::string("bad checkpoint JSON: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    const std::size_t d_in = j.at("d_in").get<std::size_t>();
    const std::size_t d_out = j.at("d_out").get<std::size_t>();
    ckpt.vocab.tokens = j.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < ckpt.vocab.tokens.size(); ++i) {
      ckpt.vocab.index[ckpt.vocab.tokens[i]] = i;
    }
    ckpt.params = encoder_from_json(j.at("theta"), d_in, d_out);
    ckpt.params_k = encoder_from_json(j.at("theta_k"), d_in, d_out);
    if (ckpt.params.token_table.rows != ckpt.vocab.table_rows()) {
      raise(Err::ParseError, "token table does not match vocabulary size");
    }
    ckpt.head.W = j.at("head").at("W").get<Vec>();
    ckpt.head.decision_threshold = j.at("head").at("decision_threshold").get<double>();
    if (ckpt.head.W.size() != 3 * d_out) {
      raise(Err::ParseError, "classifier width does not match 3*d_out");
    }
  } catch (const nlohmann::json::exception& e) {
    raise(Err::ParseError, std::string("bad checkpoint fields: ") + e.what());
  }
  return ckpt;
}

void save_train_log(const std::string& path, const std::vector<EpochRecord>& log) {
  std::ofstream out(path);
  if (!out) raise(Err::IoError, "cannot write training log to " + path);
  for (const auto& rec : log) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["train_loss"] = rec.train_loss;
    j["cre"] = rec.cre;
    j["gc_nce"] = rec.gc_nce;
    j["moco"] = rec.moco;
    j["dev_accuracy"] = rec.dev_accuracy ? nlohmann::json(*rec.dev_accuracy)
                                         : nlohmann::json(nullptr);
    j["dev_f1"] = rec.dev_f1 ? nlohmann::json(*rec.dev_f1) : nlohmann::json(nullptr);
    j["dev_auc"] = rec.dev_auc ? nlohmann::json(*rec.dev_auc) : nlohmann::json(nullptr);
    out << j.dump() << "\n";
  }
  if (!out) raise(Err::IoError, "failed writing training log to " + path);
}

}  // namespace cgl
