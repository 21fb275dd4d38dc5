#include "cgl/corpus.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cgl/errors.hpp"
#include "cgl/rng.hpp"

namespace cgl {

namespace {

using nlohmann::json;

bool is_cjk(std::uint32_t cp) {
  return (cp >= 0x3400 && cp <= 0x9FFF) ||    // unified ideographs + ext A
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x20000 && cp <= 0x3FFFF);    // ext B and beyond
}

// Decodes one UTF-8 codepoint starting at i; advances i. Malformed bytes are
// treated as single separator characters.
std::uint32_t next_codepoint(const std::string& s, std::size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) {
    ++i;
    return c;
  }
  int extra = 0;
  std::uint32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    extra = 1;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    extra = 2;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    extra = 3;
    cp = c & 0x07;
  } else {
    ++i;
    return 0;
  }
  if (i + extra >= s.size()) {
    ++i;
    return 0;
  }
  for (int k = 1; k <= extra; ++k) {
    unsigned char cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) {
      ++i;
      return 0;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  i += extra + 1;
  return cp;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

json parse_line(const std::string& line, const std::string& origin, std::size_t line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    raise(Err::ParseError, origin + ":" + std::to_string(line_no) + ": malformed JSON object");
  }
  return j;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::uint32_t cp = next_codepoint(text, i);
    if (cp < 0x80 && std::isalnum(static_cast<int>(cp))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
    if (is_cjk(cp)) {
      std::string one;
      append_utf8(one, cp);
      tokens.push_back(one);
    }
    // anything else is a separator
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

void ConceptStore::add(std::string id, std::string text) {
  if (id.empty()) raise(Err::ParseError, "empty concept id");
  if (index_.count(id)) raise(Err::DuplicateConcept, "duplicate concept id '" + id + "'");
  Concept c;
  c.id = std::move(id);
  c.text = std::move(text);
  c.tokens = tokenize(c.text);
  index_.emplace(c.id, concepts_.size());
  concepts_.push_back(std::move(c));
}

const Concept& ConceptStore::get(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) raise(Err::UnknownConcept, "unknown concept id '" + id + "'");
  return concepts_[it->second];
}

ConceptStore load_concepts_stream(std::istream& in, const std::string& origin_name) {
  ConceptStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, origin_name, line_no);
    if (!j.contains("id") || !j["id"].is_string() || !j.contains("text") ||
        !j["text"].is_string()) {
      raise(Err::ParseError,
            origin_name + ":" + std::to_string(line_no) + ": expected string fields 'id','text'");
    }
    store.add(j["id"].get<std::string>(), j["text"].get<std::string>());
  }
  return store;
}

ConceptStore load_concepts(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Err::IoError, "cannot open " + path);
  return load_concepts_stream(in, path);
}

std::vector<LabeledPair> load_pairs_stream(std::istream& in, const ConceptStore& store,
                                           const std::string& origin_name) {
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, origin_name, line_no);
    std::string where = origin_name + ":" + std::to_string(line_no);
    if (!j.contains("a") || !j["a"].is_string() || !j.contains("b") || !j["b"].is_string() ||
        !j.contains("label") || !j["label"].is_number_integer()) {
      raise(Err::ParseError, where + ": expected fields 'a','b' (strings), 'label' (0/1)");
    }
    LabeledPair p;
    p.a_id = j["a"].get<std::string>();
    p.b_id = j["b"].get<std::string>();
    int label = j["label"].get<int>();
    if (label != 0 && label != 1) {
      raise(Err::ParseError, where + ": label must be 0 or 1, got " + std::to_string(label));
    }
    if (p.a_id == p.b_id) {
      raise(Err::ParseError, where + ": self-pair '" + p.a_id + "' rejected");
    }
    if (!store.contains(p.a_id)) raise(Err::UnknownConcept, where + ": '" + p.a_id + "'");
    if (!store.contains(p.b_id)) raise(Err::UnknownConcept, where + ": '" + p.b_id + "'");
    p.label = label == 1 ? Label::related : Label::unrelated;
    p.origin = Origin::annotated;
    if (j.contains("origin")) {
      if (!j["origin"].is_string()) raise(Err::ParseError, where + ": origin must be a string");
      const std::string o = j["origin"].get<std::string>();
      if (o == "augmented") p.origin = Origin::augmented;
      else if (o != "annotated") raise(Err::ParseError, where + ": unknown origin '" + o + "'");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<LabeledPair> load_pairs(const std::string& path, const ConceptStore& store) {
  std::ifstream in(path);
  if (!in) raise(Err::IoError, "cannot open " + path);
  return load_pairs_stream(in, store, path);
}

void save_pairs(const std::string& path, const std::vector<LabeledPair>& pairs) {
  std::ofstream out(path);
  if (!out) raise(Err::IoError, "cannot write " + path);
  for (const auto& p : pairs) {
    json j;
    j["a"] = p.a_id;
    j["b"] = p.b_id;
    j["label"] = p.label == Label::related ? 1 : 0;
    j["origin"] = p.origin == Origin::annotated ? "annotated" : "augmented";
    out << j.dump() << '\n';
  }
}

DatasetSplit split_dataset(const std::vector<LabeledPair>& pairs, double train_ratio,
                           double dev_ratio, double test_ratio, std::uint64_t seed) {
  if (train_ratio <= 0 || dev_ratio <= 0 || test_ratio <= 0 ||
      std::fabs(train_ratio + dev_ratio + test_ratio - 1.0) > 1e-9) {
    raise(Err::InvalidConfig, "split ratios must be positive and sum to 1");
  }
  if (pairs.size() < 3) {
    raise(Err::InsufficientData, "need at least 3 pairs to split, got " +
                                     std::to_string(pairs.size()));
  }

  std::vector<LabeledPair> shuffled = pairs;
  Rng rng(seed);
  rng.shuffle(shuffled);

  // Largest-remainder apportionment keeps each split within one pair of its
  // requested share.
  const std::size_t n = shuffled.size();
  double ratios[3] = {train_ratio, dev_ratio, test_ratio};
  std::size_t sizes[3];
  double fracs[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(exact);
    fracs[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (fracs[i] > fracs[best]) best = i;
    ++sizes[best];
    fracs[best] = -1.0;
    ++assigned;
  }

  DatasetSplit split;
  split.seed = seed;
  auto it = shuffled.begin();
  split.train.assign(it, it + sizes[0]);
  it += sizes[0];
  split.dev.assign(it, it + sizes[1]);
  it += sizes[1];
  split.test.assign(it, shuffled.end());
  return split;
}

void save_split(const std::string& dir, const DatasetSplit& split, double train_ratio,
                double dev_ratio, double test_ratio) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_pairs((fs::path(dir) / "train.jsonl").string(), split.train);
  save_pairs((fs::path(dir) / "dev.jsonl").string(), split.dev);
  save_pairs((fs::path(dir) / "test.jsonl").string(), split.test);
  nlohmann::json manifest;
  manifest["seed"] = split.seed;
  manifest["ratios"] = {train_ratio, dev_ratio, test_ratio};
  manifest["sizes"] = {split.train.size(), split.dev.size(), split.test.size()};
  std::ofstream out(fs::path(dir) / "split_manifest.json");
  if (!out) raise(Err::IoError, "cannot write split manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

}  // namespace cgl
