#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bam/counters.hpp"
#include "bam/exec.hpp"
#include "bam/extended_real.hpp"

namespace bam {

enum class Rule { bayes, bcpnn, bcpnn2, bcpnn3 };

const char* to_string(Rule r);
Rule rule_from_string(const std::string& s);

// Query-noise estimate used at learning time. The conditional error
// probabilities are simplified to two globals p10 and p01 that are
// independent of the synapse and of the postsynaptic activity.
struct NoiseEstimate {
  double lambda_est = 1.0;
  double kappa_est = 0.0;
  double p10 = 0.0;
  double p01 = 0.0;

  static NoiseEstimate from_rates(double lambda_est, double kappa_est, int n, int k);
  static NoiseEstimate from_probs(double p10, double p01);
  static NoiseEstimate zero() { return {}; }

  friend bool operator==(const NoiseEstimate& a, const NoiseEstimate& b) {
    return a.p10 == b.p10 && a.p01 == b.p01;
  }
};

// Per-synapse counters as reals, so stabilized (non-integer) joint usage
// plugs into the same formulas. pre/post refer to the input unit i and the
// output unit j.
struct SynapseCounters {
  double m00, m01, m10, m11;
  double m0_pre, m1_pre;
  double m0_post, m1_post;
  double total;  // M
};

// Weight and bias-term kernels for each learning rule. Factors that come
// out zero are booked as infinite contributions.

inline ExtendedReal bayes_weight(const SynapseCounters& c, const NoiseEstimate& e) {
  const double q10 = 1.0 - e.p10, q01 = 1.0 - e.p01;
  LogRatio r;
  r.num(c.m11 * q10 + c.m01 * e.p01);
  r.num(c.m00 * q01 + c.m10 * e.p10);
  r.den(c.m10 * q10 + c.m00 * e.p01);
  r.den(c.m01 * q01 + c.m11 * e.p10);
  return r.value();
}

// Per-input term of the Bayesian bias sum (the query-zero branch of the
// evidence ratio).
inline ExtendedReal bayes_bias_term(const SynapseCounters& c, const NoiseEstimate& e) {
  const double q01 = 1.0 - e.p01;
  return log_ratio(c.m01 * q01 + c.m11 * e.p10, c.m00 * q01 + c.m10 * e.p10);
}

inline ExtendedReal bcpnn_weight(const SynapseCounters& c, const NoiseEstimate& e) {
  const double q10 = 1.0 - e.p10;
  LogRatio r;
  r.num(c.m11 * q10 + c.m01 * e.p01);
  r.num(c.total);
  r.den(c.m1_pre * q10 + c.m0_pre * e.p01);
  r.den(c.m1_post);
  return r.value();
}

inline ExtendedReal bcpnn2_weight(const SynapseCounters& c, const NoiseEstimate& e) {
  const double q10 = 1.0 - e.p10, q01 = 1.0 - e.p01;
  LogRatio r;
  r.num(c.m11 * q10 + c.m01 * e.p01);
  r.num(c.m0_pre * q01 + c.m1_pre * e.p10);
  r.den(c.m01 * q01 + c.m11 * e.p10);
  r.den(c.m1_pre * q10 + c.m0_pre * e.p01);
  return r.value();
}

inline ExtendedReal bcpnn2_bias_term(const SynapseCounters& c, const NoiseEstimate& e) {
  const double q01 = 1.0 - e.p01;
  return log_ratio(c.m01 * q01 + c.m11 * e.p10, c.m0_pre * q01 + c.m1_pre * e.p10);
}

inline ExtendedReal bcpnn3_weight(const SynapseCounters& c, const NoiseEstimate& e) {
  const double q10 = 1.0 - e.p10;
  LogRatio r;
  r.num(c.m11 * q10 + c.m01 * e.p01);
  r.num(c.m0_post);
  r.den(c.m10 * q10 + c.m00 * e.p01);
  r.den(c.m1_post);
  return r.value();
}

// Read-only view over a CounterStore where the joint usage M11 is floored
// at eta * eps_s^2 * M with eps_s = 1/(1+M). Unit usages and the counters
// derived from M11 stay at their unstabilized values.
class StabilizedCounters {
 public:
  StabilizedCounters(const CounterStore& base, double eta);

  const CounterStore& base() const { return base_; }
  double eta() const { return eta_; }
  double floor() const { return floor_; }
  double pair_usage(int i, int j) const {
    const double raw = static_cast<double>(base_.pair_usage(i, j));
    return raw > floor_ ? raw : floor_;
  }

 private:
  const CounterStore& base_;
  double eta_;
  double floor_;
};

inline StabilizedCounters stabilize(const CounterStore& base, double eta) {
  return {base, eta};
}

// Weights and biases of one learning rule over one counter store, kept in
// separate finite and infinity planes (row major, presynaptic index major).
struct WeightModel {
  Rule rule = Rule::bayes;
  int n_in = 0, n_out = 0;
  NoiseEstimate estimate;
  std::optional<double> eta;  // stabilization record

  std::vector<double> w_fin;
  std::vector<std::int32_t> w_inf;  // empty when no weight is infinite
  std::vector<double> bias_fin;
  std::vector<std::int32_t> bias_inf;
  bool weights_have_inf = false;
  bool bias_has_inf = false;

  ExtendedReal weight(int i, int j) const {
    const std::size_t idx = static_cast<std::size_t>(i) * n_out + j;
    return {w_fin[idx], weights_have_inf ? w_inf[idx] : 0};
  }
  ExtendedReal bias(int j) const { return {bias_fin[j], bias_inf[j]}; }
};

WeightModel build_model(Rule rule, const CounterStore& store, const NoiseEstimate& est,
                        Exec exec = Exec::parallel);
WeightModel build_model(Rule rule, const StabilizedCounters& store, const NoiseEstimate& est,
                        Exec exec = Exec::parallel);

inline WeightModel build_bayes(const CounterStore& s, const NoiseEstimate& e,
                               Exec x = Exec::parallel) {
  return build_model(Rule::bayes, s, e, x);
}
inline WeightModel build_bcpnn(const CounterStore& s, const NoiseEstimate& e,
                               Exec x = Exec::parallel) {
  return build_model(Rule::bcpnn, s, e, x);
}
inline WeightModel build_bcpnn2(const CounterStore& s, const NoiseEstimate& e,
                                Exec x = Exec::parallel) {
  return build_model(Rule::bcpnn2, s, e, x);
}
inline WeightModel build_bcpnn3(const CounterStore& s, const NoiseEstimate& e,
                                Exec x = Exec::parallel) {
  return build_model(Rule::bcpnn3, s, e, x);
}

struct UnsupportedModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dale transform: weights shifted by c = -min w so every synapse is
// non-negative; potentials are recovered by subtracting c times the query
// activity. Requires an all-finite weight matrix.
struct DaleShifted {
  WeightModel model;
  double shift;
};

DaleShifted dale_shift(const WeightModel& model);

// Replaces every infinite contribution by +-z_inf, collapsing the model to
// plain reals. Selection agrees with exact arithmetic whenever z_inf
// dominates the finite contributions along any potential.
WeightModel dirty_materialize(const WeightModel& model, double z_inf);

}  // namespace bam
