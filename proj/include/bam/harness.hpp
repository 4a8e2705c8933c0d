#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bam/csv.hpp"
#include "bam/exec.hpp"
#include "bam/metrics.hpp"
#include "bam/retrieval.hpp"

namespace bam {

// Noise-estimation schedule requested by a config. ane calibrates per rule
// at the reference load m_ref; the Willshaw core/halo step-2 estimates may
// be given as fixed hyperparameters or measured at m_ref when absent.
struct ScheduleSpec {
  enum class Kind { constant, ane, core_palm, halo_palm, core_willshaw, halo_willshaw };
  Kind kind = Kind::constant;

  std::optional<double> lambda_est, kappa_est;  // constant / ane step 1; default true noise
  double alpha = 1.0;
  int m_ref = 0;
  int calib_steps = 10;
  double beta = 0.0;
  std::optional<double> lambda_est2, kappa_est2;

  static ScheduleSpec::Kind kind_from_string(const std::string& s);
  static const char* to_string(Kind k);
};

struct ExperimentConfig {
  Mode mode = Mode::auto_assoc;
  Family family = Family::palm;
  std::vector<Rule> rules;
  int n = 0, k = 0;
  std::vector<int> m_grid;
  double lambda = 1.0, kappa = 0.0;
  ScheduleSpec schedule;
  Selection selection = Selection::kwta;
  bool selection_set = false;  // default depends on family
  std::optional<double> eta;
  int t_max = 100;
  int n_networks = 25;
  int n_queries = 40;
  std::uint64_t seed = 1;
  std::string output;

  void validate() const;
  Selection effective_selection() const;
  double step1_lambda_est() const { return schedule.lambda_est.value_or(lambda); }
  double step1_kappa_est() const { return schedule.kappa_est.value_or(kappa); }
  // Provenance string stored in the schedule CSV column.
  std::string schedule_descriptor() const;

  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

// Measured or constructed per-rule schedule; ANE calibration makes these
// rule dependent.
RetrievalSchedule resolve_schedule(const ExperimentConfig& cfg, Rule rule, Exec exec);

// Calibration pass behind ane schedules, also exposed to the CLI.
CalibrationResult run_calibration(const ExperimentConfig& cfg, Rule rule, Exec exec);

// Steps reported in sweep output: 1..10 plus the final step.
std::vector<int> reported_steps(int t_max);

// Per-trial metrics of one (rule, M, network) cell, indexed
// [reported step][query]. Pattern, target and query streams derive from
// (seed, M, network, query), so cells are reproducible in isolation.
std::vector<std::vector<TrialMetrics>> run_cell(const ExperimentConfig& cfg,
                                                const RetrievalSchedule& schedule, Rule rule,
                                                int M, int network);

// Full sweep as a CSV string; cells run independently and rows are ordered
// by (rule, M, step), so serial and parallel execution give identical bytes.
std::string sweep_csv(const ExperimentConfig& cfg, Exec exec = Exec::parallel);

// Writes sweep_csv to cfg.output.
void sweep(const ExperimentConfig& cfg, Exec exec = Exec::parallel);

struct CapacityCriterion {
  CriterionKind kind = CriterionKind::at_least;
  double threshold = 0.9;
  std::string column = "p_corr";

  // "eps:0.01" or "pcorr:0.9"
  static CapacityCriterion parse(const std::string& s);
};

struct CapacityRow {
  std::string rule;
  std::string schedule;
  int step = 0;
  bool below_grid = false;
  double capacity = 0.0;
};

std::vector<CapacityRow> capacity_report(const CsvTable& table, const CapacityCriterion& crit);
std::string capacity_report_csv(const CsvTable& table, const CapacityCriterion& crit);

// Weight-matrix dump: one line (i, j, fin, inf) per synapse.
void dump_weights(const WeightModel& model, std::ostream& out);

}  // namespace bam
