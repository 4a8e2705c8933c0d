#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace bam {

// Component errors of one retrieval: f10 false negatives, f01 false
// positives, eps their sum normalized to the target activity k.
struct TrialMetrics {
  int f10 = 0;
  int f01 = 0;
  double eps = 0.0;
  bool exact = false;
  int steps = 0;

  static TrialMetrics from_errors(int f10, int f01, int k, int steps);
};

// (f10, f01) of output vs target; their sum is the Hamming distance.
std::pair<int, int> component_errors(std::span<const std::uint8_t> target,
                                     std::span<const std::uint8_t> output);

struct CellSummary {
  double eps_mean = 0.0;
  double p_corr = 0.0;
  double f10_mean = 0.0;
  double f01_mean = 0.0;
  double lambda_out = 1.0;  // 1 - mean f10 / k
  double kappa_out = 0.0;   // mean f01 / k
  double iters_mean = 0.0;
  int trials = 0;
};

CellSummary summarize(std::span<const TrialMetrics> trials, int k);

enum class CriterionKind { at_most, at_least };  // value <= thr | value >= thr

// Largest M at which the piecewise-linear interpolant through the (M, value)
// samples satisfies the criterion: the last satisfied-to-violated crossing is
// interpolated, the final grid point is returned when it still satisfies,
// and 0 when no sample does.
double capacity(std::span<const std::pair<double, double>> samples, CriterionKind kind,
                double threshold);

}  // namespace bam
