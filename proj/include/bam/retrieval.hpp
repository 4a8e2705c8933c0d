#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bam/counters.hpp"
#include "bam/exec.hpp"
#include "bam/patterns.hpp"
#include "bam/rules.hpp"

namespace bam {

enum class Selection { kwta, threshold };

const char* to_string(Selection s);
Selection selection_from_string(const std::string& s);

// One step of an iterative-retrieval schedule: the noise estimates the
// weights are built with, and the activity selection. For K-WTA alpha
// scales the winner count (K = round(alpha*k)); for threshold selection
// a unit fires iff its potential is at least -ln(alpha).
struct ScheduleStep {
  double lambda_est;
  double kappa_est;
  double alpha;
  Selection selection;
};

class RetrievalSchedule {
 public:
  // Same estimates and selection at every step.
  static RetrievalSchedule constant(double lambda_est, double kappa_est, double alpha,
                                    Selection sel);
  // Explicit per-step estimates (measured by calibrate_ane); later steps are
  // pinned to the last listed step. alpha = 1 throughout.
  static RetrievalSchedule calibrated(std::span<const std::pair<double, double>> estimates,
                                      Selection sel);
  // Fixed core schedule for Palm patterns: step 1 activates round(alpha*k)
  // winners (alpha < 1), step 2 assumes pure miss noise (alpha, 0), later
  // steps (1-beta, beta).
  static RetrievalSchedule core_palm(double lambda, double kappa, double alpha, double beta);
  // Halo counterpart, alpha > 1: step 2 assumes pure add noise (0, alpha-1).
  static RetrievalSchedule halo_palm(double lambda, double kappa, double alpha, double beta);
  // Willshaw variants select by threshold; the step-2 estimate is a
  // hyperparameter instead of the exact first-step error rate.
  static RetrievalSchedule core_willshaw(double lambda, double kappa, double alpha,
                                         double lambda_est2, double beta);
  static RetrievalSchedule halo_willshaw(double lambda, double kappa, double alpha,
                                         double kappa_est2, double beta);

  // t is 1-based; steps beyond the explicit list repeat the tail step.
  const ScheduleStep& step(int t) const {
    const std::size_t idx = static_cast<std::size_t>(t - 1);
    return idx < steps_.size() ? steps_[idx] : tail_;
  }
  int explicit_steps() const { return static_cast<int>(steps_.size()); }

 private:
  std::vector<ScheduleStep> steps_;
  ScheduleStep tail_{1.0, 0.0, 1.0, Selection::kwta};
};

// Dendritic potentials as separate finite and infinity planes.
struct PotentialField {
  std::vector<double> fin;
  std::vector<std::int32_t> inf;
  bool inf_active = false;

  int size() const { return static_cast<int>(fin.size()); }
  ExtendedReal at(int j) const { return {fin[j], inf_active ? inf[j] : 0}; }
};

// x_j = bias_j + sum of w_ij over active query components. Cost is
// proportional to (active inputs) * n_out.
void compute_potentials(const WeightModel& model, std::span<const std::uint8_t> query,
                        PotentialField& out);
std::vector<ExtendedReal> potentials(const WeightModel& model,
                                     std::span<const std::uint8_t> query);
// Dale form: shifted weights plus activity-proportional compensation.
std::vector<ExtendedReal> potentials(const DaleShifted& dale,
                                     std::span<const std::uint8_t> query);

// Fires every unit whose potential reaches the K-th largest one; ties at
// the boundary all fire, so the output may hold more than K ones.
std::vector<std::uint8_t> kwta_select(std::span<const ExtendedReal> x, int K);
void kwta_select(const PotentialField& x, int K, std::vector<std::uint8_t>& out);

// Fires every unit with potential >= -ln(alpha); alpha = 1 is the
// non-negativity rule.
std::vector<std::uint8_t> threshold_select(std::span<const ExtendedReal> x, double alpha);
void threshold_select(const PotentialField& x, double alpha, std::vector<std::uint8_t>& out);

std::vector<std::uint8_t> one_step(const WeightModel& model, std::span<const std::uint8_t> query,
                                   Selection sel, double alpha, int k);

// Lazily built models per noise-estimate setting. Iterative schedules reuse
// at most a handful of settings, so lookups are a linear scan.
class ModelCache {
 public:
  // k is the target activity, needed to turn kappa estimates into p01.
  ModelCache(const CounterStore& store, Rule rule, int k, std::optional<double> eta,
             Exec exec = Exec::serial);

  const WeightModel& get(double lambda_est, double kappa_est);
  const CounterStore& store() const { return store_; }
  Rule rule() const { return rule_; }
  std::optional<double> eta() const { return eta_; }

 private:
  const CounterStore& store_;
  Rule rule_;
  int k_;
  std::optional<double> eta_;
  Exec exec_;
  std::vector<std::pair<std::pair<double, double>, std::unique_ptr<WeightModel>>> entries_;
};

struct IterateOptions {
  int t_max = 100;
  int k = 0;                   // target activity, scales K-WTA winner counts
  bool record_outputs = true;  // keep per-step output patterns in the trace
};

struct RetrievalTrace {
  std::vector<std::vector<std::uint8_t>> outputs;     // per executed step, optional
  std::vector<std::pair<int, int>> step_errors;       // (f10, f01) vs target per step
  std::optional<int> converged_at;
  int steps_executed = 0;
  std::vector<std::uint8_t> final_output;

  // After convergence the state repeats, so later steps report the last
  // executed one.
  std::pair<int, int> error_at(int t) const {
    return step_errors[static_cast<std::size_t>(std::min(t, steps_executed)) - 1];
  }
  int steps_used() const { return converged_at.value_or(steps_executed); }
};

RetrievalTrace iterate(ModelCache& cache, const RetrievalSchedule& schedule,
                       std::span<const std::uint8_t> query, std::span<const std::uint8_t> target,
                       const IterateOptions& opts);
RetrievalTrace iterate(const CounterStore& store, Rule rule, const RetrievalSchedule& schedule,
                       std::span<const std::uint8_t> query, std::span<const std::uint8_t> target,
                       const IterateOptions& opts, std::optional<double> eta = std::nullopt);

// Adaptive noise estimation: iterates an ensemble of stored networks step
// by step, measuring the ensemble-mean output noise after every step and
// feeding it to the next step's estimates.
struct CalibrationInput {
  std::span<const PatternSet> networks;  // address sets stored at the reference M
  Rule rule;
  std::optional<double> eta;
  double lambda, kappa;            // true query noise
  double lambda_est1, kappa_est1;  // step-1 estimates
  double alpha1 = 1.0;             // step-1 selection scale; later steps use 1
  Selection selection = Selection::kwta;
  int queries_per_network = 40;
  std::uint64_t master_seed = 0;
  int steps = 10;
  Exec exec = Exec::parallel;
};

struct CalibrationStep {
  double lambda_est, kappa_est;  // estimates used at this step
  double eps, p_corr;
  double f10_mean, f01_mean;
  double lambda_out, kappa_out;  // measured output noise
};

struct CalibrationResult {
  std::vector<CalibrationStep> steps;
  Selection selection;

  RetrievalSchedule schedule() const;
};

CalibrationResult calibrate_ane(const CalibrationInput& input);

}  // namespace bam
