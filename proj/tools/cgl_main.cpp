#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgl/augment.hpp"
#include "cgl/bm25.hpp"
#include "cgl/corpus.hpp"
#include "cgl/errors.hpp"
#include "cgl/graph.hpp"
#include "cgl/lda.hpp"
#include "cgl/manifest.hpp"
#include "cgl/metrics.hpp"
#include "cgl/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Returns the config-file value for key when the flag was not given on the
// command line; flags always win.
template <typename Fn>
void cfg_override(const CLI::App* sub, const std::string& flag,
                  const std::map<std::string, std::string>& cfg,
                  const std::string& key, Fn assign) {
  if (sub->count(flag) > 0) return;
  const auto it = cfg.find(key);
  if (it == cfg.end()) return;
  assign(it->second);
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    cgl::raise(cgl::Err::InvalidConfig, key + ": expected a number, got '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    cgl::raise(cgl::Err::InvalidConfig, key + ": expected an unsigned integer, got '" + s + "'");
  }
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  cgl::raise(cgl::Err::InvalidConfig, key + ": expected true/false, got '" + s + "'");
}

std::size_t parse_k(const std::string& s) {
  if (s == "inf") return cgl::k_infinity;
  return static_cast<std::size_t>(parse_u64(s, "aug.k"));
}

double parse_ratio(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  return parse_double(s, "aug.ratio");
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) cgl::raise(cgl::Err::IoError, "cannot create output directory " + out);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) cgl::raise(cgl::Err::IoError, "cannot write " + path);
  f << content;
  if (!f) cgl::raise(cgl::Err::IoError, "failed writing " + path);
}

void write_json_file(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

struct SplitOptions {
  double train = 0.8, dev = 0.1, test = 0.1;
  std::uint64_t seed = 0;

  void add_flags(CLI::App* sub) {
    sub->add_option("--train-ratio", train, "train fraction of the pair file");
    sub->add_option("--dev-ratio", dev, "dev fraction");
    sub->add_option("--test-ratio", test, "test fraction");
    sub->add_option("--split-seed", seed, "shuffle seed for the split");
  }

  void apply_config(const CLI::App* sub, const std::map<std::string, std::string>& cfg) {
    cfg_override(sub, "--train-ratio", cfg, "split.train",
                 [&](const std::string& v) { train = parse_double(v, "split.train"); });
    cfg_override(sub, "--dev-ratio", cfg, "split.dev",
                 [&](const std::string& v) { dev = parse_double(v, "split.dev"); });
    cfg_override(sub, "--test-ratio", cfg, "split.test",
                 [&](const std::string& v) { test = parse_double(v, "split.test"); });
    cfg_override(sub, "--split-seed", cfg, "split.seed",
                 [&](const std::string& v) { seed = parse_u64(v, "split.seed"); });
  }

  void record(std::map<std::string, std::string>& m) const {
    m["split.train"] = fmt_double(train);
    m["split.dev"] = fmt_double(dev);
    m["split.test"] = fmt_double(test);
    m["split.seed"] = std::to_string(seed);
  }
};

json stats_json(const cgl::GraphStats& s) {
  json hist = json::array();
  for (const auto& [size, count] : s.size_histogram) {
    hist.push_back(json::array({size, count}));
  }
  return json{{"node", s.nodes},
              {"edge", s.edges},
              {"components", s.components},
              {"largest_component", s.largest_component},
              {"largest_component_closure_pairs", s.largest_component_closure_pairs},
              {"conflicts", s.conflicts},
              {"size_histogram", hist}};
}

int label_int(cgl::Label l) { return l == cgl::Label::related ? 1 : 0; }

void write_decision_line(std::ostream& out, const std::string& a, const std::string& b,
                         double score, cgl::Label pred, cgl::Label label) {
  json j;
  j["a"] = a;
  j["b"] = b;
  j["score"] = score;
  j["pred"] = label_int(pred);
  j["label"] = label_int(label);
  out << j.dump() << "\n";
}

// ---------------------------------------------------------------- stats ----

struct StatsArgs {
  std::string concepts, pairs, out;
};

int run_stats(const StatsArgs& a, const std::string& subcommand) {
  cgl::ConceptStore store = cgl::load_concepts(a.concepts);
  const auto pairs = cgl::load_pairs(a.pairs, store);
  const auto graph = cgl::ConcreteGraph::build(pairs, store);
  const json stats = stats_json(cgl::graph_stats(graph));
  std::cout << stats.dump(2) << "\n";

  if (!a.out.empty()) {
    ensure_out_dir(a.out);
    write_json_file(a.out + "/stats.json", stats);
    if (subcommand == "build-graph") {
      json g;
      g["nodes"] = graph.node_ids();
      json edges = json::array();
      for (std::size_t i = 0; i < graph.node_count(); ++i) {
        for (const auto n : graph.neighbors(i)) {
          if (i < n) edges.push_back(json::array({graph.id_of(i), graph.id_of(n)}));
        }
      }
      g["edges"] = std::move(edges);
      json comps = json::array();
      for (const auto& c : graph.components()) {
        comps.push_back(json{{"index", c.index}, {"members", c.member_ids}});
      }
      g["components"] = std::move(comps);
      write_json_file(a.out + "/graph.json", g);
    }
    cgl::Manifest m;
    m.subcommand = subcommand;
    m.inputs[a.concepts] = cgl::hex64(cgl::fnv1a_file(a.concepts));
    m.inputs[a.pairs] = cgl::hex64(cgl::fnv1a_file(a.pairs));
    cgl::write_manifest(a.out + "/manifest.json", m);
  }
  return 0;
}

// -------------------------------------------------------------- augment ----

struct AugmentArgs {
  std::string concepts, pairs, out, config_path;
  std::string k_str = "2";
  std::string ratio_str = "2";
  std::uint64_t seed = 0;
  std::uint64_t cap = 5'000'000;
  SplitOptions split;
};

int run_augment(CLI::App* sub, AugmentArgs& a) {
  std::map<std::string, std::string> cfg;
  if (!a.config_path.empty()) cfg = cgl::load_config_file(a.config_path);
  a.split.apply_config(sub, cfg);
  cfg_override(sub, "--k", cfg, "aug.k", [&](const std::string& v) { a.k_str = v; });
  cfg_override(sub, "--target-ratio", cfg, "aug.ratio",
               [&](const std::string& v) { a.ratio_str = v; });
  cfg_override(sub, "--seed", cfg, "aug.seed",
               [&](const std::string& v) { a.seed = parse_u64(v, "aug.seed"); });
  cfg_override(sub, "--cap", cfg, "aug.cap",
               [&](const std::string& v) { a.cap = parse_u64(v, "aug.cap"); });

  cgl::AugmentConfig acfg;
  acfg.k = parse_k(a.k_str);
  acfg.target_ratio = parse_ratio(a.ratio_str);
  acfg.seed = a.seed;
  acfg.candidate_cap = a.cap;

  cgl::ConceptStore store = cgl::load_concepts(a.concepts);
  const auto pairs = cgl::load_pairs(a.pairs, store);
  const auto split = cgl::split_dataset(pairs, a.split.train, a.split.dev,
                                        a.split.test, a.split.seed);
  const auto graph = cgl::ConcreteGraph::build(split.train, store);
  auto [augmented, report] = cgl::augment_dataset(split.train, graph, acfg);

  ensure_out_dir(a.out);
  cgl::save_pairs(a.out + "/augmented_pairs.jsonl", augmented);

  json hist = json::array();
  for (const auto& [dist, count] : report.distance_histogram) {
    hist.push_back(json::array({dist, count}));
  }
  const json rep{{"original_related", report.original_related},
                 {"sampled_related", report.sampled_related},
                 {"sampled_unrelated", report.sampled_unrelated},
                 {"possible_related", report.possible_related},
                 {"realized_ratio", report.realized_ratio},
                 {"target_ratio", report.target_ratio},
                 {"related_exhausted", report.related_exhausted},
                 {"unrelated_exhausted", report.unrelated_exhausted},
                 {"distance_histogram", hist},
                 {"pairs", "augmented_pairs.jsonl"}};
  write_json_file(a.out + "/augment_report.json", rep);
  std::cout << rep.dump(2) << "\n";

  cgl::Manifest m;
  m.subcommand = "augment";
  m.config["aug.k"] = a.k_str;
  m.config["aug.ratio"] = a.ratio_str;
  m.config["aug.seed"] = std::to_string(a.seed);
  m.config["aug.cap"] = std::to_string(a.cap);
  a.split.record(m.config);
  m.inputs[a.concepts] = cgl::hex64(cgl::fnv1a_file(a.concepts));
  m.inputs[a.pairs] = cgl::hex64(cgl::fnv1a_file(a.pairs));
  cgl::write_manifest(a.out + "/manifest.json", m);
  return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
  std::string concepts, pairs, out, config_path, augmented_pairs;
  std::string ablation = "full";
  bool symmetrize = false;
  cgl::TrainConfig tc;
  SplitOptions split;
};

void write_scores(const std::string& path, const cgl::ConceptStore& store,
                  const std::vector<cgl::LabeledPair>& pairs,
                  const cgl::Checkpoint& ckpt, bool symmetrize) {
  std::ofstream out(path, std::ios::binary);
  if (!out) cgl::raise(cgl::Err::IoError, "cannot write " + path);
  for (const auto& p : pairs) {
    const auto pred = cgl::predict(ckpt.params, ckpt.vocab, ckpt.head,
                                   store.get(p.a_id), store.get(p.b_id), symmetrize);
    write_decision_line(out, p.a_id, p.b_id, pred.probability, pred.label, p.label);
  }
}

int run_train(CLI::App* sub, TrainArgs& a) {
  std::map<std::string, std::string> cfg;
  if (!a.config_path.empty()) cfg = cgl::load_config_file(a.config_path);
  a.split.apply_config(sub, cfg);
  auto dbl = [&](const char* flag, const char* key, double& v) {
    cfg_override(sub, flag, cfg, key,
                 [&v, key](const std::string& s) { v = parse_double(s, key); });
  };
  auto u64 = [&](const char* flag, const char* key, std::uint64_t& v) {
    cfg_override(sub, flag, cfg, key,
                 [&v, key](const std::string& s) { v = parse_u64(s, key); });
  };
  auto size = [&](const char* flag, const char* key, std::size_t& v) {
    cfg_override(sub, flag, cfg, key, [&v, key](const std::string& s) {
      v = static_cast<std::size_t>(parse_u64(s, key));
    });
  };
  dbl("--alpha", "train.alpha", a.tc.alpha);
  dbl("--beta", "train.beta", a.tc.beta);
  dbl("--tau", "train.tau", a.tc.tau);
  dbl("--momentum", "train.momentum", a.tc.momentum);
  size("--queue", "train.queue", a.tc.queue_size);
  size("--epochs", "train.epochs", a.tc.epochs);
  dbl("--lr", "train.lr", a.tc.lr);
  dbl("--adam-eps", "train.adam_eps", a.tc.adam_eps);
  dbl("--weight-decay", "train.weight_decay", a.tc.weight_decay);
  dbl("--phi-floor", "train.phi_floor", a.tc.phi_floor);
  u64("--seed", "train.seed", a.tc.seed);
  size("--d-in", "train.d_in", a.tc.d_in);
  size("--d-out", "train.d_out", a.tc.d_out);
  size("--batch", "train.batch", a.tc.batch_pairs);
  size("--gc-negatives", "train.gc_negatives", a.tc.gc_negatives);
  cfg_override(sub, "--ablation", cfg, "train.ablation",
               [&](const std::string& v) { a.ablation = v; });

  const cgl::Ablation ablation = cgl::ablation_from_string(a.ablation);

  cgl::ConceptStore store = cgl::load_concepts(a.concepts);
  const auto pairs = cgl::load_pairs(a.pairs, store);
  auto split = cgl::split_dataset(pairs, a.split.train, a.split.dev, a.split.test,
                                  a.split.seed);

  std::vector<cgl::LabeledPair> graph_pairs = split.train;
  if (!a.augmented_pairs.empty()) {
    // The augmented file replaces the train partition; edges still come only
    // from its annotated subset.
    split.train = cgl::load_pairs(a.augmented_pairs, store);
    graph_pairs.clear();
    for (const auto& p : split.train) {
      if (p.origin == cgl::Origin::annotated) graph_pairs.push_back(p);
    }
  }
  const auto graph = cgl::ConcreteGraph::build(graph_pairs, store);

  const auto result = cgl::train(store, split, graph, a.tc, ablation);

  ensure_out_dir(a.out);
  cgl::save_checkpoint(a.out + "/checkpoint.json", result.checkpoint);
  cgl::save_train_log(a.out + "/train_log.jsonl", result.log);
  if (!split.dev.empty()) {
    write_scores(a.out + "/dev_scores.jsonl", store, split.dev, result.checkpoint,
                 a.symmetrize);
  }
  if (!split.test.empty()) {
    write_scores(a.out + "/test_scores.jsonl", store, split.test, result.checkpoint,
                 a.symmetrize);
  }

  json summary;
  summary["epochs"] = result.log.size();
  if (!result.log.empty()) {
    const auto& last = result.log.back();
    summary["final_train_loss"] = last.train_loss;
    summary["final_dev_accuracy"] =
        last.dev_accuracy ? json(*last.dev_accuracy) : json(nullptr);
    summary["final_dev_f1"] = last.dev_f1 ? json(*last.dev_f1) : json(nullptr);
    summary["final_dev_auc"] = last.dev_auc ? json(*last.dev_auc) : json(nullptr);
  }
  summary["checkpoint"] = "checkpoint.json";
  summary["log"] = "train_log.jsonl";
  std::cout << summary.dump(2) << "\n";

  cgl::Manifest m;
  m.subcommand = "train";
  m.config["train.alpha"] = fmt_double(a.tc.alpha);
  m.config["train.beta"] = fmt_double(a.tc.beta);
  m.config["train.tau"] = fmt_double(a.tc.tau);
  m.config["train.momentum"] = fmt_double(a.tc.momentum);
  m.config["train.queue"] = std::to_string(a.tc.queue_size);
  m.config["train.epochs"] = std::to_string(a.tc.epochs);
  m.config["train.lr"] = fmt_double(a.tc.lr);
  m.config["train.adam_eps"] = fmt_double(a.tc.adam_eps);
  m.config["train.weight_decay"] = fmt_double(a.tc.weight_decay);
  m.config["train.phi_floor"] = fmt_double(a.tc.phi_floor);
  m.config["train.seed"] = std::to_string(a.tc.seed);
  m.config["train.d_in"] = std::to_string(a.tc.d_in);
  m.config["train.d_out"] = std::to_string(a.tc.d_out);
  m.config["train.batch"] = std::to_string(a.tc.batch_pairs);
  m.config["train.gc_negatives"] = std::to_string(a.tc.gc_negatives);
  m.config["train.ablation"] = a.ablation;
  m.config["train.symmetrize"] = a.symmetrize ? "true" : "false";
  a.split.record(m.config);
  m.inputs[a.concepts] = cgl::hex64(cgl::fnv1a_file(a.concepts));
  m.inputs[a.pairs] = cgl::hex64(cgl::fnv1a_file(a.pairs));
  if (!a.augmented_pairs.empty()) {
    m.inputs[a.augmented_pairs] = cgl::hex64(cgl::fnv1a_file(a.augmented_pairs));
  }
  cgl::write_manifest(a.out + "/manifest.json", m);
  return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string scores, out;
};

int run_eval(const EvalArgs& a) {
  std::ifstream in(a.scores);
  if (!in) cgl::raise(cgl::Err::IoError, "cannot open " + a.scores);
  std::vector<cgl::Label> preds, labels;
  std::vector<double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("score") || !j.contains("pred") ||
        !j.contains("label")) {
      cgl::raise(cgl::Err::ParseError, a.scores + ":" + std::to_string(line_no) +
                                           ": expected {score, pred, label}");
    }
    scores.push_back(j["score"].get<double>());
    preds.push_back(j["pred"].get<int>() == 1 ? cgl::Label::related
                                              : cgl::Label::unrelated);
    labels.push_back(j["label"].get<int>() == 1 ? cgl::Label::related
                                                : cgl::Label::unrelated);
  }
  const auto c = cgl::confusion(preds, labels);
  const auto m = cgl::metrics(c);
  const bool has_pos = c.tp + c.fn > 0;
  const bool has_neg = c.tn + c.fp > 0;

  json rep;
  rep["accuracy"] = m.accuracy;
  rep["precision"] = m.precision;
  rep["recall"] = m.recall;
  rep["specificity"] = m.specificity;
  rep["f1"] = m.f1;
  rep["auc"] =
      (has_pos && has_neg) ? json(cgl::roc_auc(scores, labels)) : json(nullptr);
  rep["confusion"] = {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
  json undefined = json::array();
  if (!m.precision_defined) undefined.push_back("precision");
  if (!m.recall_defined) undefined.push_back("recall");
  if (!m.specificity_defined) undefined.push_back("specificity");
  if (!m.f1_defined) undefined.push_back("f1");
  if (!m.accuracy_defined) undefined.push_back("accuracy");
  rep["undefined"] = std::move(undefined);
  std::cout << rep.dump(2) << "\n";

  if (!a.out.empty()) {
    ensure_out_dir(a.out);
    write_json_file(a.out + "/report.json", rep);
    cgl::Manifest m2;
    m2.subcommand = "eval";
    m2.inputs[a.scores] = cgl::hex64(cgl::fnv1a_file(a.scores));
    cgl::write_manifest(a.out + "/manifest.json", m2);
  }
  return 0;
}

// ------------------------------------------------------------- baseline ----

struct BaselineCommon {
  std::string concepts, pairs, out, config_path;
  SplitOptions split;
};

json baseline_report(double accuracy, double f1, double threshold,
                     std::uint64_t predict_true, std::uint64_t test_num,
                     const std::string& accounting) {
  return json{{"accuracy", accuracy},   {"f1", f1},
              {"threshold", threshold}, {"predict_true", predict_true},
              {"test_num", test_num},   {"accounting", accounting},
              {"decisions", "decisions.jsonl"}};
}

struct Bm25Args {
  BaselineCommon common;
  double threshold = 0.4;
  double k1 = 1.2, k2 = 100.0, b = 0.75;
  bool faithful = false;
  bool tune = false;
};

int run_bm25(CLI::App* sub, Bm25Args& a) {
  std::map<std::string, std::string> cfg;
  if (!a.common.config_path.empty()) cfg = cgl::load_config_file(a.common.config_path);
  a.common.split.apply_config(sub, cfg);
  cfg_override(sub, "--threshold", cfg, "bm25.threshold", [&](const std::string& v) {
    a.threshold = parse_double(v, "bm25.threshold");
  });
  cfg_override(sub, "--k1", cfg, "bm25.k1",
               [&](const std::string& v) { a.k1 = parse_double(v, "bm25.k1"); });
  cfg_override(sub, "--k2", cfg, "bm25.k2",
               [&](const std::string& v) { a.k2 = parse_double(v, "bm25.k2"); });
  cfg_override(sub, "--b", cfg, "bm25.b",
               [&](const std::string& v) { a.b = parse_double(v, "bm25.b"); });
  cfg_override(sub, "--faithful", cfg, "bm25.faithful",
               [&](const std::string& v) { a.faithful = parse_bool(v, "bm25.faithful"); });

  cgl::ConceptStore store = cgl::load_concepts(a.common.concepts);
  const auto pairs = cgl::load_pairs(a.common.pairs, store);
  const auto split = cgl::split_dataset(pairs, a.common.split.train, a.common.split.dev,
                                        a.common.split.test, a.common.split.seed);

  if (a.tune) {
    const auto dev_scored = cgl::bm25_score_pairs(split.dev, store, a.k1, a.k2, a.b);
    a.threshold = cgl::tune_bm25_threshold(dev_scored, a.faithful);
  }
  const auto result = cgl::bm25_estimate(split.test, store, a.threshold, a.k1, a.k2,
                                         a.b, a.faithful);

  ensure_out_dir(a.common.out);
  {
    std::ofstream dec(a.common.out + "/decisions.jsonl", std::ios::binary);
    if (!dec) cgl::raise(cgl::Err::IoError, "cannot write decisions.jsonl");
    for (const auto& d : result.decisions) {
      write_decision_line(dec, d.a_id, d.b_id, d.score, d.pred, d.label);
    }
  }
  std::vector<cgl::Label> preds, labels;
  for (const auto& d : result.decisions) {
    preds.push_back(d.pred);
    labels.push_back(d.label);
  }
  const auto mr = cgl::metrics(cgl::confusion(preds, labels));
  const json rep =
      baseline_report(result.accuracy, mr.f1, a.threshold, result.predict_true,
                      result.test_num, result.faithful ? "faithful" : "per-direction");
  write_json_file(a.common.out + "/report.json", rep);
  std::cout << rep.dump(2) << "\n";

  cgl::Manifest m;
  m.subcommand = "baseline bm25";
  m.config["bm25.threshold"] = fmt_double(a.threshold);
  m.config["bm25.k1"] = fmt_double(a.k1);
  m.config["bm25.k2"] = fmt_double(a.k2);
  m.config["bm25.b"] = fmt_double(a.b);
  m.config["bm25.faithful"] = a.faithful ? "true" : "false";
  m.config["bm25.tuned"] = a.tune ? "true" : "false";
  a.common.split.record(m.config);
  m.inputs[a.common.concepts] = cgl::hex64(cgl::fnv1a_file(a.common.concepts));
  m.inputs[a.common.pairs] = cgl::hex64(cgl::fnv1a_file(a.common.pairs));
  cgl::write_manifest(a.common.out + "/manifest.json", m);
  return 0;
}

struct LdaArgs {
  BaselineCommon common;
  std::size_t topics = 20;
  std::size_t iters = 200;
  double threshold = 0.004;
  double a_prior = 0.0;  // 0 = 50/K
  double b_prior = 0.01;
  std::uint64_t seed = 0;
};

int run_lda(CLI::App* sub, LdaArgs& a) {
  std::map<std::string, std::string> cfg;
  if (!a.common.config_path.empty()) cfg = cgl::load_config_file(a.common.config_path);
  a.common.split.apply_config(sub, cfg);
  cfg_override(sub, "--topics", cfg, "lda.topics", [&](const std::string& v) {
    a.topics = static_cast<std::size_t>(parse_u64(v, "lda.topics"));
  });
  cfg_override(sub, "--iters", cfg, "lda.iters", [&](const std::string& v) {
    a.iters = static_cast<std::size_t>(parse_u64(v, "lda.iters"));
  });
  cfg_override(sub, "--threshold", cfg, "lda.threshold", [&](const std::string& v) {
    a.threshold = parse_double(v, "lda.threshold");
  });
  cfg_override(sub, "--a-prior", cfg, "lda.a",
               [&](const std::string& v) { a.a_prior = parse_double(v, "lda.a"); });
  cfg_override(sub, "--b-prior", cfg, "lda.b",
               [&](const std::string& v) { a.b_prior = parse_double(v, "lda.b"); });
  cfg_override(sub, "--seed", cfg, "lda.seed",
               [&](const std::string& v) { a.seed = parse_u64(v, "lda.seed"); });

  cgl::ConceptStore store = cgl::load_concepts(a.common.concepts);
  const auto pairs = cgl::load_pairs(a.common.pairs, store);
  const auto split = cgl::split_dataset(pairs, a.common.split.train, a.common.split.dev,
                                        a.common.split.test, a.common.split.seed);

  std::vector<std::vector<std::string>> train_docs;
  train_docs.reserve(2 * split.train.size());
  for (const auto& p : split.train) {
    train_docs.push_back(store.get(p.a_id).tokens);
    train_docs.push_back(store.get(p.b_id).tokens);
  }
  const double a_prior =
      a.a_prior > 0.0 ? a.a_prior : 50.0 / static_cast<double>(a.topics);
  const auto model =
      cgl::train_lda(train_docs, a.topics, a.iters, a_prior, a.b_prior, a.seed);
  const auto result = cgl::lda_estimate(split.test, store, model, a.threshold);

  ensure_out_dir(a.common.out);
  {
    std::ofstream dec(a.common.out + "/decisions.jsonl", std::ios::binary);
    if (!dec) cgl::raise(cgl::Err::IoError, "cannot write decisions.jsonl");
    for (const auto& d : result.decisions) {
      write_decision_line(dec, d.a_id, d.b_id, d.score, d.pred, d.label);
    }
  }
  std::vector<cgl::Label> preds, labels;
  for (const auto& d : result.decisions) {
    preds.push_back(d.pred);
    labels.push_back(d.label);
  }
  const auto mr = cgl::metrics(cgl::confusion(preds, labels));
  const json rep = baseline_report(result.accuracy, mr.f1, a.threshold,
                                   result.predict_true, result.test_num, "per-pair");
  write_json_file(a.common.out + "/report.json", rep);
  std::cout << rep.dump(2) << "\n";

  cgl::Manifest m;
  m.subcommand = "baseline lda";
  m.config["lda.topics"] = std::to_string(a.topics);
  m.config["lda.iters"] = std::to_string(a.iters);
  m.config["lda.threshold"] = fmt_double(a.threshold);
  m.config["lda.a"] = fmt_double(a_prior);
  m.config["lda.b"] = fmt_double(a.b_prior);
  m.config["lda.seed"] = std::to_string(a.seed);
  a.common.split.record(m.config);
  m.inputs[a.common.concepts] = cgl::hex64(cgl::fnv1a_file(a.common.concepts));
  m.inputs[a.common.pairs] = cgl::hex64(cgl::fnv1a_file(a.common.pairs));
  cgl::write_manifest(a.common.out + "/manifest.json", m);
  return 0;
}

// ---------------------------------------------------------------- ttest ----

struct TTestArgs {
  std::string a_path, b_path, out;
  double a_mean = 0, a_std = 0, b_mean = 0, b_std = 0;
  std::uint64_t a_n = 0, b_n = 0;
};

cgl::RunStats stats_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) cgl::raise(cgl::Err::IoError, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    cgl::raise(cgl::Err::ParseError, path + ": " + e.what());
  }
  std::vector<double> values;
  if (j.is_array()) {
    values = j.get<std::vector<double>>();
  } else if (j.is_object() && j.contains("values")) {
    values = j["values"].get<std::vector<double>>();
  } else if (j.is_object() && j.contains("mean") && j.contains("std") &&
             j.contains("n")) {
    cgl::RunStats s;
    s.mean = j["mean"].get<double>();
    s.sample_std = j["std"].get<double>();
    s.n = j["n"].get<std::size_t>();
    return s;
  } else {
    cgl::raise(cgl::Err::ParseError,
               path + ": expected an array, {values: []}, or {mean, std, n}");
  }
  return cgl::run_stats(values);
}

int run_ttest(CLI::App* sub, const TTestArgs& a) {
  cgl::RunStats sa, sb;
  if (!a.a_path.empty()) {
    sa = stats_from_file(a.a_path);
  } else if (sub->count("--a-mean") > 0) {
    sa = cgl::RunStats{a.a_mean, a.a_std, static_cast<std::size_t>(a.a_n)};
  } else {
    cgl::raise(cgl::Err::InvalidConfig, "provide --a or --a-mean/--a-std/--a-n");
  }
  if (!a.b_path.empty()) {
    sb = stats_from_file(a.b_path);
  } else if (sub->count("--b-mean") > 0) {
    sb = cgl::RunStats{a.b_mean, a.b_std, static_cast<std::size_t>(a.b_n)};
  } else {
    cgl::raise(cgl::Err::InvalidConfig, "provide --b or --b-mean/--b-std/--b-n");
  }
  const auto r = cgl::welch_ttest(sa, sb);
  const json rep{{"t", r.t}, {"df", r.df}, {"p", r.p}};
  std::cout << rep.dump(2) << "\n";
  if (!a.out.empty()) {
    ensure_out_dir(a.out);
    write_json_file(a.out + "/ttest.json", rep);
    cgl::Manifest m;
    m.subcommand = "ttest";
    if (!a.a_path.empty()) m.inputs[a.a_path] = cgl::hex64(cgl::fnv1a_file(a.a_path));
    if (!a.b_path.empty()) m.inputs[a.b_path] = cgl::hex64(cgl::fnv1a_file(a.b_path));
    m.config["a.mean"] = fmt_double(sa.mean);
    m.config["a.std"] = fmt_double(sa.sample_std);
    m.config["a.n"] = std::to_string(sa.n);
    m.config["b.mean"] = fmt_double(sb.mean);
    m.config["b.std"] = fmt_double(sb.sample_std);
    m.config["b.n"] = std::to_string(sb.n);
    cgl::write_manifest(a.out + "/manifest.json", m);
  }
  return 0;
}

// ----------------------------------------------------------- embed-dump ----

struct EmbedArgs {
  std::string checkpoint, concepts, out;
};

int run_embed_dump(const EmbedArgs& a) {
  const auto ckpt = cgl::load_checkpoint(a.checkpoint);
  cgl::ConceptStore store = cgl::load_concepts(a.concepts);
  ensure_out_dir(a.out);
  std::ofstream out(a.out + "/embeddings.tsv", std::ios::binary);
  if (!out) cgl::raise(cgl::Err::IoError, "cannot write embeddings.tsv");
  for (const auto& c : store.concepts()) {
    const auto e = cgl::encode_concept(ckpt.params, ckpt.vocab, c);
    out << c.id;
    for (double x : e.v) out << "\t" << fmt_double(x);
    out << "\n";
  }
  cgl::Manifest m;
  m.subcommand = "embed-dump";
  m.inputs[a.checkpoint] = cgl::hex64(cgl::fnv1a_file(a.checkpoint));
  m.inputs[a.concepts] = cgl::hex64(cgl::fnv1a_file(a.concepts));
  cgl::write_manifest(a.out + "/manifest.json", m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concept relatedness toolkit"};
  app.require_subcommand(1);

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "graph statistics for a pair file");
  stats_cmd->add_option("--concepts", stats_args.concepts, "concepts.jsonl")->required();
  stats_cmd->add_option("--pairs", stats_args.pairs, "pairs.jsonl")->required();
  stats_cmd->add_option("--out", stats_args.out, "output directory");

  StatsArgs bg_args;
  auto* bg_cmd = app.add_subcommand("build-graph", "build and export the concept graph");
  bg_cmd->add_option("--concepts", bg_args.concepts, "concepts.jsonl")->required();
  bg_cmd->add_option("--pairs", bg_args.pairs, "pairs.jsonl")->required();
  bg_cmd->add_option("--out", bg_args.out, "output directory")->required();

  AugmentArgs aug_args;
  auto* aug_cmd = app.add_subcommand("augment", "sample extra pairs from the graph");
  aug_cmd->add_option("--concepts", aug_args.concepts, "concepts.jsonl")->required();
  aug_cmd->add_option("--pairs", aug_args.pairs, "pairs.jsonl")->required();
  aug_cmd->add_option("--out", aug_args.out, "output directory")->required();
  aug_cmd->add_option("--config", aug_args.config_path, "key=value config file");
  aug_cmd->add_option("--k", aug_args.k_str, "hop bound (>=2 or 'inf')");
  aug_cmd->add_option("--target-ratio", aug_args.ratio_str, "target ratio (or 'inf')");
  aug_cmd->add_option("--seed", aug_args.seed, "sampling seed");
  aug_cmd->add_option("--cap", aug_args.cap, "candidate materialization cap");
  aug_args.split.add_flags(aug_cmd);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "optimize the encoder and classifier");
  train_cmd->add_option("--concepts", train_args.concepts, "concepts.jsonl")->required();
  train_cmd->add_option("--pairs", train_args.pairs, "pairs.jsonl")->required();
  train_cmd->add_option("--out", train_args.out, "output directory")->required();
  train_cmd->add_option("--config", train_args.config_path, "key=value config file");
  train_cmd->add_option("--augmented-pairs", train_args.augmented_pairs,
                        "pairs file replacing the train partition");
  train_cmd->add_option("--ablation", train_args.ablation,
                        "full|gc_only|moco_only|cre_only");
  train_cmd->add_flag("--symmetrize", train_args.symmetrize,
                      "average both argument orders when scoring");
  train_cmd->add_option("--alpha", train_args.tc.alpha, "concentration smoothing");
  train_cmd->add_option("--beta", train_args.tc.beta, "contrastive weight");
  train_cmd->add_option("--tau", train_args.tc.tau, "InfoNCE temperature");
  train_cmd->add_option("--momentum", train_args.tc.momentum, "key-encoder momentum");
  train_cmd->add_option("--queue", train_args.tc.queue_size, "negative queue size");
  train_cmd->add_option("--epochs", train_args.tc.epochs, "training epochs");
  train_cmd->add_option("--lr", train_args.tc.lr, "peak learning rate");
  train_cmd->add_option("--adam-eps", train_args.tc.adam_eps, "optimizer epsilon");
  train_cmd->add_option("--weight-decay", train_args.tc.weight_decay,
                        "decoupled weight decay");
  train_cmd->add_option("--phi-floor", train_args.tc.phi_floor, "concentration floor");
  train_cmd->add_option("--seed", train_args.tc.seed, "training seed");
  train_cmd->add_option("--d-in", train_args.tc.d_in, "token vector width");
  train_cmd->add_option("--d-out", train_args.tc.d_out, "embedding width");
  train_cmd->add_option("--batch", train_args.tc.batch_pairs, "pairs per step");
  train_cmd->add_option("--gc-negatives", train_args.tc.gc_negatives,
                        "cap on sampled negative components (0 = all)");
  train_args.split.add_flags(train_cmd);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score a decisions file");
  eval_cmd->add_option("--scores", eval_args.scores, "decisions/scores JSONL")->required();
  eval_cmd->add_option("--out", eval_args.out, "output directory");

  auto* baseline_cmd = app.add_subcommand("baseline", "traditional estimators");
  baseline_cmd->require_subcommand(1);

  Bm25Args bm25_args;
  auto* bm25_cmd = baseline_cmd->add_subcommand("bm25", "retrieval-style harness");
  bm25_cmd->add_option("--concepts", bm25_args.common.concepts, "concepts.jsonl")->required();
  bm25_cmd->add_option("--pairs", bm25_args.common.pairs, "pairs.jsonl")->required();
  bm25_cmd->add_option("--out", bm25_args.common.out, "output directory")->required();
  bm25_cmd->add_option("--config", bm25_args.common.config_path, "key=value config file");
  bm25_cmd->add_option("--threshold", bm25_args.threshold, "decision threshold in [0,1]");
  bm25_cmd->add_option("--k1", bm25_args.k1, "doc term-frequency saturation");
  bm25_cmd->add_option("--k2", bm25_args.k2, "query term-frequency saturation");
  bm25_cmd->add_option("--b", bm25_args.b, "length normalization");
  bm25_cmd->add_flag("--faithful", bm25_args.faithful,
                     "divide by every score evaluation instead of 2n");
  bm25_cmd->add_flag("--tune-threshold", bm25_args.tune, "pick the threshold on dev");
  bm25_args.common.split.add_flags(bm25_cmd);

  LdaArgs lda_args;
  auto* lda_cmd = baseline_cmd->add_subcommand("lda", "topic-model harness");
  lda_cmd->add_option("--concepts", lda_args.common.concepts, "concepts.jsonl")->required();
  lda_cmd->add_option("--pairs", lda_args.common.pairs, "pairs.jsonl")->required();
  lda_cmd->add_option("--out", lda_args.common.out, "output directory")->required();
  lda_cmd->add_option("--config", lda_args.common.config_path, "key=value config file");
  lda_cmd->add_option("--topics", lda_args.topics, "topic count K");
  lda_cmd->add_option("--iters", lda_args.iters, "Gibbs sweeps");
  lda_cmd->add_option("--threshold", lda_args.threshold, "similarity threshold");
  lda_cmd->add_option("--a-prior", lda_args.a_prior, "doc-topic prior (0 = 50/K)");
  lda_cmd->add_option("--b-prior", lda_args.b_prior, "topic-word prior");
  lda_cmd->add_option("--seed", lda_args.seed, "Gibbs seed");
  lda_args.common.split.add_flags(lda_cmd);

  TTestArgs tt_args;
  auto* tt_cmd = app.add_subcommand("ttest", "one-tailed unequal-variance test");
  tt_cmd->add_option("--a", tt_args.a_path, "baseline run metrics (JSON)");
  tt_cmd->add_option("--b", tt_args.b_path, "candidate run metrics (JSON)");
  tt_cmd->add_option("--a-mean", tt_args.a_mean, "baseline mean");
  tt_cmd->add_option("--a-std", tt_args.a_std, "baseline sample std");
  tt_cmd->add_option("--a-n", tt_args.a_n, "baseline run count");
  tt_cmd->add_option("--b-mean", tt_args.b_mean, "candidate mean");
  tt_cmd->add_option("--b-std", tt_args.b_std, "candidate sample std");
  tt_cmd->add_option("--b-n", tt_args.b_n, "candidate run count");
  tt_cmd->add_option("--out", tt_args.out, "output directory");

  EmbedArgs embed_args;
  auto* embed_cmd = app.add_subcommand("embed-dump", "write embeddings as TSV");
  embed_cmd->add_option("--checkpoint", embed_args.checkpoint, "checkpoint.json")->required();
  embed_cmd->add_option("--concepts", embed_args.concepts, "concepts.jsonl")->required();
  embed_cmd->add_option("--out", embed_args.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*stats_cmd) return run_stats(stats_args, "stats");
    if (*bg_cmd) return run_stats(bg_args, "build-graph");
    if (*aug_cmd) return run_augment(aug_cmd, aug_args);
    if (*train_cmd) return run_train(train_cmd, train_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*bm25_cmd) return run_bm25(bm25_cmd, bm25_args);
    if (*lda_cmd) return run_lda(lda_cmd, lda_args);
    if (*tt_cmd) return run_ttest(tt_cmd, tt_args);
    if (*embed_cmd) return run_embed_dump(embed_args);
  } catch (const cgl::CglError& e) {
    const json err{{"error", cgl::err_name(e.code())}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    const json err{{"error", "Internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
