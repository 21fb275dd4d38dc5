#include "cgl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgl/errors.hpp"

namespace cgl {

Confusion confusion(const std::vector<Label>& predictions,
                    const std::vector<Label>& labels) {
  if (predictions.size() != labels.size()) {
    raise(Err::ShapeError, "prediction/label length mismatch");
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred_pos = predictions[i] == Label::related;
    const bool is_pos = labels[i] == Label::related;
    if (pred_pos && is_pos) ++c.tp;
    else if (pred_pos && !is_pos) ++c.fp;
    else if (!pred_pos && is_pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {
double safe_ratio(std::uint64_t num, std::uint64_t den, bool& defined) {
  if (den == 0) {
    defined = false;
    return 0.0;
  }
  defined = true;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

MetricsReport metrics(const Confusion& c) {
  MetricsReport r;
  r.precision = safe_ratio(c.tp, c.tp + c.fp, r.precision_defined);
  r.recall = safe_ratio(c.tp, c.tp + c.fn, r.recall_defined);
  r.specificity = safe_ratio(c.tn, c.tn + c.fp, r.specificity_defined);
  r.accuracy = safe_ratio(c.tp + c.tn, c.total(), r.accuracy_defined);
  if (r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.f1_defined = true;
  } else {
    r.f1 = 0.0;
    r.f1_defined = false;
  }
  return r;
}

double roc_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
  if (scores.size() != labels.size()) {
    raise(Err::ShapeError, "score/label length mismatch");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (Label l : labels) (l == Label::related ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) {
    raise(Err::SingleClass, "AUC needs both a positive and a negative example");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Average ranks across ties, accumulate the rank-sum of the positives.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == Label::related) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

RunStats run_stats(const std::vector<double>& values) {
  if (values.size() < 2) {
    raise(Err::DegenerateTest, "need at least two runs per sample");
  }
  RunStats s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(s.n);
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.sample_std = std::sqrt(sq / static_cast<double>(s.n - 1));
  return s;
}

namespace {

// Continued-fraction kernel for the regularized incomplete beta (modified
// Lentz), the standard evaluation that converges fast for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  raise(Err::NumericalError, "incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) raise(Err::InvalidConfig, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
  if (df <= 0.0) raise(Err::InvalidConfig, "degrees of freedom must be positive");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double half_tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x);
  return t > 0.0 ? half_tail : 1.0 - half_tail;
}

TTestResult welch_ttest(const RunStats& a, const RunStats& b) {
  if (a.n < 2 || b.n < 2) {
    raise(Err::DegenerateTest, "both samples need n >= 2");
  }
  const double va_n = a.sample_std * a.sample_std / static_cast<double>(a.n);
  const double vb_n = b.sample_std * b.sample_std / static_cast<double>(b.n);
  const double se2 = va_n + vb_n;
  if (se2 == 0.0) {
    raise(Err::DegenerateTest, "zero variance in both samples");
  }
  TTestResult r;
  r.t = (b.mean - a.mean) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va_n * va_n / static_cast<double>(a.n - 1) +
          vb_n * vb_n / static_cast<double>(b.n - 1));
  r.p = student_t_upper_tail(r.t, r.df);
  return r;
}

}  // namespace cgl
