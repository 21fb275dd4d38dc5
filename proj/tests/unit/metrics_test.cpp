#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "cgl/errors.hpp"
#include "cgl/metrics.hpp"
#include "cgl/rng.hpp"

using namespace cgl;

namespace {

Label lab(int x) { return x ? Label::related : Label::unrelated; }

}  // namespace

TEST_CASE("confusion counts match an independent recount") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(400 + seed);
    const std::size_t n = 5 + rng.bounded(60);
    std::vector<Label> preds(n), labels(n);
    std::array<std::array<std::uint64_t, 2>, 2> cells{};
    for (std::size_t i = 0; i < n; ++i) {
      const int p = static_cast<int>(rng.bounded(2));
      const int l = static_cast<int>(rng.bounded(2));
      preds[i] = lab(p);
      labels[i] = lab(l);
      ++cells[p][l];
    }
    const Confusion c = confusion(preds, labels);
    CHECK(c.tp == cells[1][1]);
    CHECK(c.fp == cells[1][0]);
    CHECK(c.fn == cells[0][1]);
    CHECK(c.tn == cells[0][0]);
    CHECK(c.total() == n);
  }
  CHECK_THROWS_AS(confusion({Label::related}, {}), CglError);
}

TEST_CASE("metric ratios on a worked confusion") {
  Confusion c;
  c.tp = 3;
  c.fp = 1;
  c.tn = 4;
  c.fn = 2;
  const MetricsReport r = metrics(c);
  CHECK(r.precision == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r.recall == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r.specificity == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r.accuracy == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.precision_defined);
  CHECK(r.recall_defined);
  CHECK(r.specificity_defined);
  CHECK(r.accuracy_defined);
  CHECK(r.f1_defined);
}

TEST_CASE("zero denominators flag the metric instead of dividing") {
  SUBCASE("no positive predictions") {
    Confusion c;
    c.tn = 4;
    c.fn = 2;
    const MetricsReport r = metrics(c);
    CHECK_FALSE(r.precision_defined);
    CHECK(r.precision == 0.0);
    CHECK(r.recall_defined);  // fn > 0 keeps the denominator alive
    CHECK(r.recall == 0.0);
    CHECK_FALSE(r.f1_defined);
  }
  SUBCASE("no positive labels") {
    Confusion c;
    c.tn = 3;
    c.fp = 1;
    const MetricsReport r = metrics(c);
    CHECK_FALSE(r.recall_defined);
    CHECK(r.precision_defined);
    CHECK_FALSE(r.f1_defined);
  }
  SUBCASE("no negative labels") {
    Confusion c;
    c.tp = 3;
    c.fn = 1;
    const MetricsReport r = metrics(c);
    CHECK_FALSE(r.specificity_defined);
    CHECK(r.recall_defined);
  }
  SUBCASE("defined ratios that are zero still zero out the harmonic mean") {
    Confusion c;
    c.fp = 2;
    c.fn = 2;
    const MetricsReport r = metrics(c);
    CHECK(r.precision_defined);
    CHECK(r.recall_defined);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK_FALSE(r.f1_defined);  // 0/0 harmonic mean stays undefined
  }
  SUBCASE("empty confusion") {
    const MetricsReport r = metrics(Confusion{});
    CHECK_FALSE(r.accuracy_defined);
    CHECK_FALSE(r.precision_defined);
    CHECK_FALSE(r.recall_defined);
    CHECK_FALSE(r.specificity_defined);
    CHECK_FALSE(r.f1_defined);
  }
}

TEST_CASE("ranking quality on the worked score sets") {
  const std::vector<Label> labels = {lab(1), lab(0), lab(1), lab(0)};
  CHECK(roc_auc({0.8, 0.6, 0.4, 0.2}, labels) == doctest::Approx(0.75).epsilon(1e-15));
  // Perfect and inverted orderings bracket the range.
  CHECK(roc_auc({0.9, 0.1, 0.8, 0.2}, labels) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(roc_auc({0.1, 0.9, 0.2, 0.8}, labels) == doctest::Approx(0.0).epsilon(1e-15));
  // Ties split the credit.
  CHECK(roc_auc({0.7, 0.7}, {lab(1), lab(0)}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(roc_auc({0.3, 0.3, 0.3, 0.3}, labels) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ranking quality matches the pairwise comparison count") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(700 + seed);
    const std::size_t n = 4 + rng.bounded(30);
    std::vector<double> scores(n);
    std::vector<Label> labels(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse score grid keeps ties common.
      scores[i] = static_cast<double>(rng.bounded(10)) / 10.0;
      labels[i] = lab(static_cast<int>(rng.bounded(2)));
      (labels[i] == Label::related ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] != Label::related) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] != Label::unrelated) continue;
        pairs += 1.0;
        if (scores[i] > scores[j]) wins += 1.0;
        else if (scores[i] == scores[j]) wins += 0.5;
      }
    }
    CHECK(roc_auc(scores, labels) == doctest::Approx(wins / pairs).epsilon(1e-12));
  }
}

TEST_CASE("ranking quality needs both classes") {
  try {
    roc_auc({0.1, 0.2}, {lab(1), lab(1)});
    FAIL("expected a single class error");
  } catch (const CglError& e) {
    CHECK(e.code() == Err::SingleClass);
  }
  CHECK_THROWS_AS(roc_auc({0.1}, {lab(1), lab(0)}), CglError);
}

TEST_CASE("run statistics use the sample standard deviation") {
  const RunStats s = run_stats({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  CHECK(s.n == 8);
  CHECK(s.mean == doctest::Approx(5.0).epsilon(1e-15));
  // Squared deviations sum to 32; dividing by n-1 gives 32/7.
  CHECK(s.sample_std == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-15));
  try {
    run_stats({1.0});
    FAIL("expected a degenerate test error");
  } catch (const CglError& e) {
    CHECK(e.code() == Err::DegenerateTest);
  }
}

TEST_CASE("one-tail comparison on the worked samples") {
  const RunStats a{10.0, 1.0, 10};
  const RunStats b{11.0, 1.0, 10};
  const TTestResult r = welch_ttest(a, b);
  CHECK(r.t == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(r.df == doctest::Approx(18.0).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.019124807258056927).epsilon(1e-12));
}

TEST_CASE("unequal sample sizes and variances hit the generalized df") {
  const RunStats a{0.0, 1.0, 5};
  const RunStats b{1.0, 2.0, 12};
  const TTestResult r = welch_ttest(a, b);
  CHECK(r.t == doctest::Approx(1.3693063937629153).epsilon(1e-14));
  CHECK(r.df == doctest::Approx(14.150753768844221).epsilon(1e-13));
  CHECK(r.p == doctest::Approx(0.09612235891853083).epsilon(1e-12));
}

TEST_CASE("identical samples sit exactly at the symmetry point") {
  const RunStats a{3.0, 0.5, 6};
  const TTestResult r = welch_ttest(a, a);
  CHECK(r.t == 0.0);
  CHECK(r.p == 0.5);
}

TEST_CASE("swapping the samples negates t and reflects p") {
  const RunStats a{10.0, 1.2, 8};
  const RunStats b{11.5, 2.1, 11};
  const TTestResult fwd = welch_ttest(a, b);
  const TTestResult rev = welch_ttest(b, a);
  CHECK(rev.t == doctest::Approx(-fwd.t).epsilon(1e-15));
  CHECK(rev.df == doctest::Approx(fwd.df).epsilon(1e-15));
  CHECK(fwd.p + rev.p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate comparisons are rejected") {
  CHECK_THROWS_AS(welch_ttest({1.0, 0.5, 1}, {2.0, 0.5, 10}), CglError);
  try {
    welch_ttest({1.0, 0.0, 5}, {2.0, 0.0, 5});
    FAIL("expected a degenerate test error");
  } catch (const CglError& e) {
    CHECK(e.code() == Err::DegenerateTest);
  }
}

TEST_CASE("regularized incomplete beta hits its closed forms") {
  CHECK(regularized_incomplete_beta(2.0, 2.0, -0.5) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 2.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 2.0, 1.0) == 1.0);
  CHECK(regularized_incomplete_beta(2.0, 2.0, 1.5) == 1.0);
  // I_x(1,1) is the identity; I_x(2,2) = 3x^2 - 2x^3.
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.37) ==
        doctest::Approx(0.37).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2.0, 2.0, 0.25) ==
        doctest::Approx(0.15625).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(0.5, 0.5, 0.5) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(0.5, 1.5, 0.3) ==
        doctest::Approx(0.66074594914354516).epsilon(1e-12));
  // Reflection identity ties the two continued-fraction branches together.
  const double lhs = regularized_incomplete_beta(3.0, 5.0, 0.7);
  const double rhs = 1.0 - regularized_incomplete_beta(5.0, 3.0, 0.3);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), CglError);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, -1.0, 0.5), CglError);
}

TEST_CASE("upper tail probability matches the Cauchy special case") {
  // One degree of freedom is a Cauchy distribution: tail = 1/2 - atan(t)/pi.
  CHECK(student_t_upper_tail(1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(student_t_upper_tail(-1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(student_t_upper_tail(0.0, 7.5) == 0.5);
  CHECK_THROWS_AS(student_t_upper_tail(1.0, 0.0), CglError);
}
