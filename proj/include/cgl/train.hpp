#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgl/corpus.hpp"
#include "cgl/encoder.hpp"
#include "cgl/graph.hpp"
#include "cgl/losses.hpp"

namespace cgl {

enum class Ablation { full, gc_only, moco_only, cre_only };

Ablation ablation_from_string(const std::string& name);
const char* ablation_name(Ablation a);

struct TrainConfig {
  double alpha = 10.0;           // smoothing inside the concentration estimate
  double beta = 0.1;             // weight of the contrastive terms
  double tau = 0.1;              // InfoNCE temperature
  double momentum = 1.0 - 1e-4;  // key-encoder EMA coefficient
  std::size_t queue_size = 32;
  std::size_t epochs = 5;
  double lr = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  double phi_floor = 1e-3;
  std::uint64_t seed = 0;
  std::size_t d_in = 64;
  std::size_t d_out = 64;
  std::size_t batch_pairs = 8;
  std::size_t gc_negatives = 0;  // 0 = softmax over every component

  void validate() const;  // raises InvalidConfig on bad ranges
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double cre = 0.0;
  double gc_nce = 0.0;
  double moco = 0.0;
  std::optional<double> dev_accuracy;
  std::optional<double> dev_f1;
  std::optional<double> dev_auc;
};

struct Checkpoint {
  EncoderParams params;    // main encoder
  EncoderParams params_k;  // momentum encoder
  ClassifierHead head;
  Vocab vocab;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> log;
};

// Called after every optimizer step with the post-step parameters; lets tests
// replay the momentum-encoder trajectory.
using StepObserver = std::function<void(std::size_t step, const EncoderParams& theta,
                                        const EncoderParams& theta_k)>;

// Freezes concept embeddings, component embeddings, and concentrations from
// the current parameters, in graph order.
EpochSnapshot make_epoch_snapshot(const EncoderParams& params, const Vocab& vocab,
                                  const ConceptStore& store, const ConcreteGraph& graph,
                                  double alpha, double phi_floor);

// The full optimization loop: per epoch, snapshot, then one AdamW step per
// pair batch combining the classifier loss with the two contrastive terms,
// pushing momentum-encoder keys into the queue after each step.
TrainResult train(const ConceptStore& store, const DatasetSplit& split,
                  const ConcreteGraph& graph, const TrainConfig& config,
                  Ablation ablation = Ablation::full,
                  const StepObserver& observer = nullptr);

struct Prediction {
  double probability = 0.0;
  Label label = Label::unrelated;
};

// p >= decision_threshold reads as related; the symmetrize flag averages both
// argument orders.
Prediction predict(const EncoderParams& params, const Vocab& vocab,
                   const ClassifierHead& head, const Concept& a, const Concept& b,
                   bool symmetrize = false);

// JSON checkpoint with both encoders, the classifier and the vocabulary;
// doubles survive the round trip bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

void save_train_log(const std::string& path, const std::vector<EpochRecord>& log);

}  // namespace cgl
