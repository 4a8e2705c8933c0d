#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "bam/metrics.hpp"
#include "bam/rng.hpp"

using namespace bam;

TEST_CASE("component errors split the hamming distance") {
  const std::vector<std::uint8_t> target{1, 1, 0, 0};
  const std::vector<std::uint8_t> output{1, 0, 1, 0};
  CHECK(component_errors(target, output) == std::pair<int, int>{1, 1});
  CHECK(component_errors(target, target) == std::pair<int, int>{0, 0});
  CHECK_THROWS_AS(component_errors(target, std::vector<std::uint8_t>{1}),
                  std::invalid_argument);
  CHECK(TrialMetrics::from_errors(1, 1, 2, 1).eps == 1.0);
  CHECK(TrialMetrics::from_errors(0, 0, 2, 1).exact);
}

TEST_CASE("summaries normalize by the target activity") {
  // mean f10 = mean f01 = 0.1770 at k = 32 reproduces the reference
  // lambda_out of 0.99447 and eps of 0.011
  std::vector<TrialMetrics> trials;
  const int total = 10000;
  const int errors = 1770;
  for (int t = 0; t < total; ++t) {
    const int f = t < errors ? 1 : 0;
    trials.push_back(TrialMetrics::from_errors(f, f, 32, 3));
  }
  const CellSummary s = summarize(trials, 32);
  CHECK(s.f10_mean == doctest::Approx(0.1770));
  CHECK(s.lambda_out == doctest::Approx(0.99447).epsilon(1e-4));
  CHECK(s.kappa_out == doctest::Approx(0.0055312).epsilon(1e-3));
  CHECK(s.eps_mean == doctest::Approx(0.011060).epsilon(1e-3));
}

TEST_CASE("summary means equal a direct recomputation") {
  SplitMix64 rng(501);
  std::vector<TrialMetrics> trials;
  for (int t = 0; t < 257; ++t)
    trials.push_back(TrialMetrics::from_errors(static_cast<int>(rng.next_below(5)),
                                               static_cast<int>(rng.next_below(5)), 16,
                                               1 + static_cast<int>(rng.next_below(9))));
  const CellSummary s = summarize(trials, 16);
  double f10 = 0, f01 = 0, eps = 0, iters = 0;
  int exact = 0;
  for (const auto& t : trials) {
    f10 += t.f10;
    f01 += t.f01;
    eps += t.eps;
    iters += t.steps;
    exact += t.exact;
  }
  CHECK(s.f10_mean == doctest::Approx(f10 / trials.size()).epsilon(1e-12));
  CHECK(s.f01_mean == doctest::Approx(f01 / trials.size()).epsilon(1e-12));
  CHECK(s.eps_mean == doctest::Approx(eps / trials.size()).epsilon(1e-12));
  CHECK(s.iters_mean == doctest::Approx(iters / trials.size()).epsilon(1e-12));
  CHECK(s.p_corr == doctest::Approx(static_cast<double>(exact) / trials.size()));
  CHECK_THROWS_AS(summarize({}, 16), std::invalid_argument);
}

TEST_CASE("p_corr counts exact trials") {
  std::vector<TrialMetrics> trials;
  trials.push_back(TrialMetrics::from_errors(0, 0, 8, 1));
  trials.push_back(TrialMetrics::from_errors(0, 0, 8, 1));
  trials.push_back(TrialMetrics::from_errors(0, 0, 8, 1));
  trials.push_back(TrialMetrics::from_errors(1, 0, 8, 1));
  const CellSummary s = summarize(trials, 8);
  CHECK(s.p_corr == 0.75);

  std::vector<TrialMetrics> all_exact(5, TrialMetrics::from_errors(0, 0, 8, 1));
  const CellSummary e = summarize(all_exact, 8);
  CHECK(e.lambda_out == 1.0);
  CHECK(e.kappa_out == 0.0);
}

TEST_CASE("capacity interpolates the last crossing") {
  using Samples = std::vector<std::pair<double, double>>;
  const Samples simple{{1000, 0.95}, {1100, 0.85}};
  CHECK(capacity(simple, CriterionKind::at_least, 0.9) == doctest::Approx(1050.0));

  const Samples never{{100, 0.2}, {200, 0.3}};
  CHECK(capacity(never, CriterionKind::at_least, 0.9) == 0.0);

  const Samples always{{100, 0.99}, {200, 0.95}};
  CHECK(capacity(always, CriterionKind::at_least, 0.9) == 200.0);

  // dip below at small M, as the stabilized rules show: the last crossing
  // counts
  const Samples dip{{100, 0.2}, {200, 0.95}, {300, 0.93}, {400, 0.85}};
  CHECK(capacity(dip, CriterionKind::at_least, 0.9) == doctest::Approx(337.5));

  const Samples eps_curve{{100, 0.002}, {200, 0.02}};
  CHECK(capacity(eps_curve, CriterionKind::at_most, 0.01) ==
        doctest::Approx(100 + 100 * (0.01 - 0.002) / (0.02 - 0.002)));

  CHECK_THROWS_AS(capacity(Samples{{100, 0.5}}, CriterionKind::at_least, 0.9),
                  std::invalid_argument);
  CHECK_THROWS_AS(capacity(Samples{{100, 0.5}, {100, 0.4}}, CriterionKind::at_least, 0.9),
                  std::invalid_argument);
  CHECK_THROWS_AS(capacity(Samples{{200, 0.5}, {100, 0.4}}, CriterionKind::at_least, 0.9),
                  std::invalid_argument);
}

TEST_CASE("capacity is monotone in the threshold") {
  SplitMix64 rng(502);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, double>> samples;
    double m = 100;
    for (int i = 0; i < 8; ++i) {
      samples.emplace_back(m, rng.next_double());
      m += 50 + static_cast<double>(rng.next_below(100));
    }
    const double strict = capacity(samples, CriterionKind::at_most, 0.2);
    const double relaxed = capacity(samples, CriterionKind::at_most, 0.4);
    CHECK(relaxed >= strict);
    const double hard = capacity(samples, CriterionKind::at_least, 0.9);
    const double soft = capacity(samples, CriterionKind::at_least, 0.7);
    CHECK(soft >= hard);
  }
}

TEST_CASE("denser grids over a convex noise curve never lower the estimate") {
  // underlying output-noise curve eps(M) = 1e-8 M^2, convex and increasing;
  // the chord overestimates it, so linear interpolation underestimates the
  // crossing and refinement can only move it up
  auto curve = [](double m) { return 1e-8 * m * m; };
  SplitMix64 rng(503);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> coarse{200.0, 1600.0};
    std::vector<double> fine = coarse;
    for (int extra = 0; extra < 4; ++extra)
      fine.push_back(250.0 + static_cast<double>(rng.next_below(1300)));
    std::sort(fine.begin(), fine.end());
    fine.erase(std::unique(fine.begin(), fine.end()), fine.end());
    auto sample = [&](const std::vector<double>& grid) {
      std::vector<std::pair<double, double>> s;
      for (double m : grid) s.emplace_back(m, curve(m));
      return capacity(s, CriterionKind::at_most, 0.01);
    };
    CHECK(sample(fine) >= sample(coarse) - 1e-9);
    CHECK(sample(fine) <= 1000.0 + 1e-9);  // true crossing
  }
}
