#include "bam/metrics.hpp"

#include <stdexcept>

namespace bam {

TrialMetrics TrialMetrics::from_errors(int f10, int f01, int k, int steps) {
  if (k < 1) throw std::invalid_argument("TrialMetrics: need k >= 1");
  TrialMetrics m;
  m.f10 = f10;
  m.f01 = f01;
  m.eps = static_cast<double>(f10 + f01) / static_cast<double>(k);
  m.exact = f10 == 0 && f01 == 0;
  m.steps = steps;
  return m;
}

std::pair<int, int> component_errors(std::span<const std::uint8_t> target,
                                     std::span<const std::uint8_t> output) {
  if (target.size() != output.size())
    throw std::invalid_argument("component_errors: length mismatch");
  int f10 = 0, f01 = 0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    f10 += target[j] && !output[j];
    f01 += !target[j] && output[j];
  }
  return {f10, f01};
}

CellSummary summarize(std::span<const TrialMetrics> trials, int k) {
  if (trials.empty()) throw std::invalid_argument("summarize: empty trial list");
  CellSummary s;
  s.trials = static_cast<int>(trials.size());
  double f10 = 0.0, f01 = 0.0, eps = 0.0, steps = 0.0;
  int exact = 0;
  for (const TrialMetrics& t : trials) {
    f10 += t.f10;
    f01 += t.f01;
    eps += t.eps;
    steps += t.steps;
    exact += t.exact ? 1 : 0;
  }
  const double n = static_cast<double>(s.trials);
  s.f10_mean = f10 / n;
  s.f01_mean = f01 / n;
  s.eps_mean = eps / n;
  s.p_corr = static_cast<double>(exact) / n;
  s.lambda_out = 1.0 - s.f10_mean / static_cast<double>(k);
  s.kappa_out = s.f01_mean / static_cast<double>(k);
  s.iters_mean = steps / n;
  return s;
}

double capacity(std::span<const std::pair<double, double>> samples, CriterionKind kind,
                double threshold) {
  if (samples.size() < 2) throw std::invalid_argument("capacity: need at least 2 samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i - 1].first < samples[i].first))
      throw std::invalid_argument("capacity: M samples must be strictly increasing");

  auto satisfied = [&](double v) {
    return kind == CriterionKind::at_most ? v <= threshold : v >= threshold;
  };

  if (satisfied(samples.back().second)) return samples.back().first;
  for (std::size_t i = samples.size() - 1; i-- > 0;) {
    const auto [m0, v0] = samples[i];
    const auto [m1, v1] = samples[i + 1];
    if (satisfied(v0) && !satisfied(v1))
      return m0 + (m1 - m0) * (threshold - v0) / (v1 - v0);
  }
  return 0.0;
}

}  // namespace bam
