#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace cgl {

enum class Label : int { unrelated = 0, related = 1 };
enum class Origin : int { annotated = 0, augmented = 1 };

/// One document node: id, raw text and its token sequence.
struct Concept {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
};

struct LabeledPair {
  std::string a_id;
  std::string b_id;
  Label label = Label::unrelated;
  Origin origin = Origin::annotated;
};

inline bool same_unordered(const LabeledPair& p, const std::string& a, const std::string& b) {
  return (p.a_id == a && p.b_id == b) || (p.a_id == b && p.b_id == a);
}

class ConceptStore {
public:
  /// Adds a concept; tokens are derived from text.
  void add(std::string id, std::string text);

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  const Concept& get(const std::string& id) const;
  const std::vector<Concept>& concepts() const { return concepts_; }
  std::size_t size() const { return concepts_.size(); }

private:
  std::vector<Concept> concepts_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct DatasetSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> dev;
  std::vector<LabeledPair> test;
  std::uint64_t seed = 0;
};

/// Lowercases, then emits Latin alphanumeric runs as single tokens and every
/// CJK codepoint as its own token. Everything else separates.
std::vector<std::string> tokenize(const std::string& text);

/// Reads concepts.jsonl: one {"id": ..., "text": ...} object per line.
ConceptStore load_concepts(const std::string& path);
ConceptStore load_concepts_stream(std::istream& in, const std::string& origin_name);

/// Reads pairs.jsonl: {"a": ..., "b": ..., "label": 0|1} per line. Every id
/// must resolve in the store; self-pairs are rejected.
std::vector<LabeledPair> load_pairs(const std::string& path, const ConceptStore& store);
std::vector<LabeledPair> load_pairs_stream(std::istream& in, const ConceptStore& store,
                                           const std::string& origin_name);

void save_pairs(const std::string& path, const std::vector<LabeledPair>& pairs);

/// Seeded shuffle followed by a contiguous partition. Ratios must be positive
/// and sum to 1; the same seed always reproduces the same split.
DatasetSplit split_dataset(const std::vector<LabeledPair>& pairs,
                           double train_ratio, double dev_ratio, double test_ratio,
                           std::uint64_t seed);

/// Persists train/dev/test pair files plus a manifest recording seed and ratios.
void save_split(const std::string& dir, const DatasetSplit& split,
                double train_ratio, double dev_ratio, double test_ratio);

}  // namespace cgl
