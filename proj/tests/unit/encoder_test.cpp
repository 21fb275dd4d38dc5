#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support/gradcheck.hpp"
#include "cgl/encoder.hpp"
#include "cgl/errors.hpp"
#include "cgl/rng.hpp"

using namespace cgl;
using cgl::testsupport::central_diff;
using cgl::testsupport::grad_close;

namespace {

ConceptStore small_store() {
  ConceptStore s;
  s.add("p", "red green blue");
  s.add("q", "green blue yellow");
  s.add("r", "yellow red");
  return s;
}

Concept make_doc(const std::string& id, const std::string& text) {
  Concept c;
  c.id = id;
  c.text = text;
  c.tokens = tokenize(text);
  return c;
}

}  // namespace

TEST_CASE("vocab is sorted, unique, with a trailing unk row") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  CHECK(v.tokens == std::vector<std::string>{"blue", "green", "red", "yellow"});
  CHECK(v.table_rows() == 5);
  CHECK(v.unk_row() == 4);
  CHECK(v.row_of("red") == 2);
  CHECK(v.row_of("never-seen") == 4);
}

TEST_CASE("init_params is deterministic, bounded, identity-projected") {
  auto v = Vocab::from_store(small_store());
  auto p1 = init_params(v, 8, 4, 123);
  auto p2 = init_params(v, 8, 4, 123);
  CHECK(p1.token_table.data == p2.token_table.data);
  auto p3 = init_params(v, 8, 4, 124);
  CHECK(p1.token_table.data != p3.token_table.data);

  const double half = 0.5 / 8.0;
  for (double x : p1.token_table.data) {
    CHECK(std::fabs(x) <= half);
  }
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 8; ++c) {
      CHECK(p1.projection.at(r, c) == (r == c ? 1.0 : 0.0));
    }
  }
  CHECK_THROWS_AS(init_params(v, 8, 1, 0), CglError);
}

TEST_CASE("embeddings are unit-norm and token-order invariant") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  auto p = init_params(v, 6, 4, 9);

  auto e1 = encode_concept(p, v, make_doc("x", "red green blue"));
  CHECK(e1.normalized);
  CHECK(norm2(e1.v) == doctest::Approx(1.0).epsilon(1e-12));

  auto e2 = encode_concept(p, v, make_doc("x", "blue red green"));
  for (std::size_t i = 0; i < e1.v.size(); ++i) {
    CHECK(e1.v[i] == doctest::Approx(e2.v[i]).epsilon(1e-12));
  }

  // doubling every token leaves the mean unchanged
  auto e3 = encode_concept(p, v, make_doc("x", "red red green green blue blue"));
  for (std::size_t i = 0; i < e1.v.size(); ++i) {
    CHECK(e1.v[i] == doctest::Approx(e3.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("out-of-vocabulary tokens all share the unk vector") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  auto p = init_params(v, 6, 4, 9);
  auto ea = encode_concept(p, v, make_doc("x", "zorp"));
  auto eb = encode_concept(p, v, make_doc("y", "flurb"));
  CHECK(ea.v == eb.v);
}

TEST_CASE("empty documents are rejected") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  auto p = init_params(v, 6, 4, 9);
  try {
    encode_concept(p, v, make_doc("x", "..."));
    FAIL("expected EmptyConcept");
  } catch (const CglError& e) {
    CHECK(e.code() == Err::EmptyConcept);
  }
}

TEST_CASE("degenerate norms are reported") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  auto p = init_params(v, 6, 4, 9);
  p.token_table.fill(0.0);
  try {
    encode_concept(p, v, make_doc("x", "red"));
    FAIL("expected NormalizationDegenerate");
  } catch (const CglError& e) {
    CHECK(e.code() == Err::NormalizationDegenerate);
  }
}

TEST_CASE("component embedding is the renormalized member mean") {
  Embedding a{{1.0, 0.0}, true};
  Embedding b{{0.0, 1.0}, true};
  auto c = encode_component({a, b});
  const double s = std::sqrt(0.5);
  CHECK(c.v[0] == doctest::Approx(s).epsilon(1e-15));
  CHECK(c.v[1] == doctest::Approx(s).epsilon(1e-15));

  CHECK_THROWS_AS(encode_component({}), CglError);
  Embedding bad{{1.0, 0.0, 0.0}, true};
  CHECK_THROWS_AS(encode_component({a, bad}), CglError);
  Embedding neg{{-1.0, 0.0}, true};
  CHECK_THROWS_AS(encode_component({a, neg}), CglError);  // mean collapses
}

TEST_CASE("backprop through the encoder matches finite differences") {
  auto store = small_store();
  auto v = Vocab::from_store(store);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto p = init_params(v, 5, 3, seed);
    Rng rng(seed * 7 + 1);
    // random linear functional of the embedding as the loss
    Vec g(3);
    for (auto& x : g) x = rng.unit_double() * 2.0 - 1.0;
    Concept doc = make_doc("x", "red green blue red");

    EncodeCache cache;
    auto emb = encode_concept_cached(p, v, doc, cache);
    GradientTape tape = GradientTape::zeros_like(p);
    backprop_embedding(p, cache, g, tape);

    auto loss = [&]() {
      EncodeCache c2;
      auto e = encode_concept_cached(p, v, doc, c2);
      return dot(g, e.v);
    };
    (void)emb;
    for (std::size_t i = 0; i < p.token_table.data.size(); ++i) {
      const double num = central_diff(&p.token_table.data[i], loss, 1e-5);
      CHECK(grad_close(tape.d_token_table.data[i], num));
    }
    for (std::size_t i = 0; i < p.projection.data.size(); ++i) {
      const double num = central_diff(&p.projection.data[i], loss, 1e-5);
      CHECK(grad_close(tape.d_projection.data[i], num));
    }
  }
}

TEST_CASE("backprop rejects mismatched upstream gradients") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  auto p = init_params(v, 5, 3, 0);
  EncodeCache cache;
  encode_concept_cached(p, v, make_doc("x", "red"), cache);
  GradientTape tape = GradientTape::zeros_like(p);
  CHECK_THROWS_AS(backprop_embedding(p, cache, Vec(4, 0.0), tape), CglError);
}

TEST_CASE("momentum update blends parameters convexly") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  auto q = init_params(v, 4, 3, 1);
  auto k = init_params(v, 4, 3, 2);
  auto k0 = k;

  momentum_update(k, q, 1.0);
  CHECK(k.token_table.data == k0.token_table.data);

  momentum_update(k, q, 0.0);
  CHECK(k.token_table.data == q.token_table.data);
  CHECK(k.projection.data == q.projection.data);

  k = k0;
  momentum_update(k, q, 0.75);
  for (std::size_t i = 0; i < k.token_table.data.size(); ++i) {
    CHECK(k.token_table.data[i] ==
          doctest::Approx(0.75 * k0.token_table.data[i] + 0.25 * q.token_table.data[i])
              .epsilon(1e-15));
  }

  auto wide = init_params(v, 5, 3, 3);
  CHECK_THROWS_AS(momentum_update(k, wide, 0.5), CglError);
}

TEST_CASE("gradient tape detects non-finite entries") {
  auto store = small_store();
  auto v = Vocab::from_store(store);
  auto p = init_params(v, 4, 3, 1);
  auto tape = GradientTape::zeros_like(p);
  CHECK(tape.all_finite());
  tape.d_projection.data[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(tape.all_finite());
  tape.reset();
  CHECK(tape.all_finite());
}
