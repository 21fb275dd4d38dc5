#include "toy_corpus.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "cgl/rng.hpp"

namespace cgl::testsupport {

namespace {

constexpr std::size_t kCorePool = 4;    // per-segment vocabulary
constexpr std::size_t kCorePerDoc = 3;
constexpr std::size_t kCommonPool = 8;  // per-topic background vocabulary
constexpr std::size_t kCommonPerDoc = 3;
constexpr std::size_t kSharedPool = 12;  // 20% of each topic's 60-word vocabulary
constexpr std::size_t kSharedPerDoc = 3;

std::string doc_id(std::size_t topic, std::size_t pos) {
  return "t" + std::to_string(topic) + "d" + std::to_string(pos);
}

// id format is t<topic>d<position>
void parse_id(const std::string& id, std::size_t& topic, std::size_t& pos) {
  const auto d = id.find('d');
  topic = std::stoul(id.substr(1, d - 1));
  pos = std::stoul(id.substr(d + 1));
}

}  // namespace

bool ToyCorpus::ground_truth(const std::string& a_id, const std::string& b_id) {
  std::size_t ta, pa, tb, pb;
  parse_id(a_id, ta, pa);
  parse_id(b_id, tb, pb);
  return ta == tb && pa / kSegment == pb / kSegment;
}

ToyCorpus make_toy_corpus(std::uint64_t seed, std::size_t n_pairs) {
  Rng rng(seed);
  ToyCorpus out;

  for (std::size_t topic = 0; topic < 2; ++topic) {
    for (std::size_t pos = 0; pos < ToyCorpus::kDocsPerTopic; ++pos) {
      const std::size_t segment = pos / ToyCorpus::kSegment;
      std::vector<std::string> words;
      std::vector<std::size_t> core{0, 1, 2, 3};
      static_assert(kCorePool == 4);
      rng.shuffle(core);
      for (std::size_t w = 0; w < kCorePerDoc; ++w) {
        words.push_back("t" + std::to_string(topic) + "b" + std::to_string(segment) +
                        "w" + std::to_string(core[w]));
      }
      for (std::size_t w = 0; w < kCommonPerDoc; ++w) {
        words.push_back("t" + std::to_string(topic) + "m" +
                        std::to_string(rng.bounded(kCommonPool)));
      }
      for (std::size_t w = 0; w < kSharedPerDoc; ++w) {
        words.push_back("shw" + std::to_string(rng.bounded(kSharedPool)));
      }
      rng.shuffle(words);
      std::string text;
      for (const auto& w : words) {
        if (!text.empty()) text += ' ';
        text += w;
      }
      out.store.add(doc_id(topic, pos), text);
    }
  }

  const std::size_t n_related = n_pairs / 2;
  const std::size_t n_unrelated = n_pairs - n_related;
  const std::size_t segments = ToyCorpus::kDocsPerTopic / ToyCorpus::kSegment;
  std::set<std::pair<std::string, std::string>> used;
  auto take = [&](std::string a, std::string b, Label label) {
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) return false;
    out.pairs.push_back({a, b, label, Origin::annotated});
    return true;
  };

  // related: pairs inside one segment, plus an occasional bridge across a
  // segment boundary standing in for annotation noise
  while (out.pairs.size() < n_related) {
    const std::size_t topic = rng.bounded(2);
    if (rng.bounded(32) == 0) {
      const std::size_t boundary = rng.bounded(segments - 1);
      take(doc_id(topic, boundary * ToyCorpus::kSegment + ToyCorpus::kSegment - 1),
           doc_id(topic, (boundary + 1) * ToyCorpus::kSegment), Label::related);
      continue;
    }
    const std::size_t segment = rng.bounded(segments);
    const std::size_t pa = rng.bounded(ToyCorpus::kSegment);
    std::size_t pb = rng.bounded(ToyCorpus::kSegment);
    if (pa == pb) continue;
    take(doc_id(topic, segment * ToyCorpus::kSegment + pa),
         doc_id(topic, segment * ToyCorpus::kSegment + pb), Label::related);
  }

  // unrelated: alternate cross-topic pairs with same-topic pairs from two
  // different segments, so topic membership alone cannot settle a pair
  std::size_t added = 0;
  while (added < n_unrelated) {
    if (added % 2 == 0) {
      const std::size_t pa = rng.bounded(ToyCorpus::kDocsPerTopic);
      const std::size_t pb = rng.bounded(ToyCorpus::kDocsPerTopic);
      if (take(doc_id(0, pa), doc_id(1, pb), Label::unrelated)) ++added;
    } else {
      const std::size_t topic = rng.bounded(2);
      const std::size_t pa = rng.bounded(ToyCorpus::kDocsPerTopic);
      const std::size_t pb = rng.bounded(ToyCorpus::kDocsPerTopic);
      if (pa / ToyCorpus::kSegment == pb / ToyCorpus::kSegment) continue;
      if (take(doc_id(topic, pa), doc_id(topic, pb), Label::unrelated)) ++added;
    }
  }

  rng.shuffle(out.pairs);
  return out;
}

}  // namespace cgl::testsupport
