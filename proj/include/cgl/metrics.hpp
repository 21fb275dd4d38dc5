#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cgl/corpus.hpp"

namespace cgl {

struct Confusion {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
};

// Counts with `related` as the positive class.
Confusion confusion(const std::vector<Label>& predictions,
                    const std::vector<Label>& labels);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;       // sensitivity
  double specificity = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  // 0/0 ratios report 0 with the matching flag cleared.
  bool precision_defined = true;
  bool recall_defined = true;
  bool specificity_defined = true;
  bool f1_defined = true;
  bool accuracy_defined = true;
};

MetricsReport metrics(const Confusion& c);

// Mann-Whitney formulation with average ranks for ties; equals trapezoidal
// ROC integration. Requires at least one positive and one negative label.
double roc_auc(const std::vector<double>& scores, const std::vector<Label>& labels);

struct RunStats {
  double mean = 0.0;
  double sample_std = 0.0;  // Bessel-corrected
  std::size_t n = 0;
};

RunStats run_stats(const std::vector<double>& values);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 0.0;  // upper-tail probability of mean_b > mean_a
};

// Welch's unequal-variance t statistic with the Welch-Satterthwaite degrees
// of freedom; one-tailed p for the alternative "b exceeds a".
TTestResult welch_ttest(const RunStats& a, const RunStats& b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation,
// accurate to ~1e-12. Exposed because the t CDF test exercises it directly.
double regularized_incomplete_beta(double a, double b, double x);

// P(T > t) for Student's t with df degrees of freedom.
double student_t_upper_tail(double t, double df);

}  // namespace cgl
