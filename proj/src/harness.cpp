#include "bam/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "bam/rng.hpp"

namespace bam {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}
std::string fmt_param(double v) { return fmt("%.10g", v); }
std::string fmt_metric(double v) { return fmt("%.9g", v); }

}  // namespace

ScheduleSpec::Kind ScheduleSpec::kind_from_string(const std::string& s) {
  if (s == "constant") return Kind::constant;
  if (s == "ane") return Kind::ane;
  if (s == "core-palm") return Kind::core_palm;
  if (s == "halo-palm") return Kind::halo_palm;
  if (s == "core-willshaw") return Kind::core_willshaw;
  if (s == "halo-willshaw") return Kind::halo_willshaw;
  throw std::invalid_argument("unknown schedule kind: " + s);
}

const char* ScheduleSpec::to_string(Kind k) {
  switch (k) {
    case Kind::constant: return "constant";
    case Kind::ane: return "ane";
    case Kind::core_palm: return "core-palm";
    case Kind::halo_palm: return "halo-palm";
    case Kind::core_willshaw: return "core-willshaw";
    case Kind::halo_willshaw: return "halo-willshaw";
  }
  return "?";
}

Selection ExperimentConfig::effective_selection() const {
  switch (schedule.kind) {
    case ScheduleSpec::Kind::core_palm:
    case ScheduleSpec::Kind::halo_palm:
      return Selection::kwta;
    case ScheduleSpec::Kind::core_willshaw:
    case ScheduleSpec::Kind::halo_willshaw:
      return Selection::threshold;
    default:
      break;
  }
  if (selection_set) return selection;
  return family == Family::palm ? Selection::kwta : Selection::threshold;
}

void ExperimentConfig::validate() const {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("config: need 1 <= k <= n");
  if (rules.empty()) throw std::invalid_argument("config: need at least one rule");
  if (m_grid.empty()) throw std::invalid_argument("config: empty m_grid");
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (m_grid[i] < 1) throw std::invalid_argument("config: m_grid entries must be >= 1");
    if (i > 0 && m_grid[i - 1] >= m_grid[i])
      throw std::invalid_argument("config: m_grid must be strictly increasing");
  }
  QuerySpec check_noise(lambda, kappa, n, k);
  (void)check_noise;
  if (t_max < 1) throw std::invalid_argument("config: need t_max >= 1");
  if (n_networks < 1 || n_queries < 1)
    throw std::invalid_argument("config: need n_networks, n_queries >= 1");
  if (eta && !(*eta > 0.0)) throw std::invalid_argument("config: eta must be positive");
  if (mode == Mode::hetero) {
    if (t_max != 1) throw std::invalid_argument("config: hetero mode is one-step only");
    if (schedule.kind != ScheduleSpec::Kind::constant)
      throw std::invalid_argument("config: hetero mode needs a constant schedule");
  }

  using Kind = ScheduleSpec::Kind;
  switch (schedule.kind) {
    case Kind::constant:
      if (!(schedule.alpha > 0.0))
        throw std::invalid_argument("config: schedule alpha must be positive");
      break;
    case Kind::ane:
      if (schedule.m_ref < 1) throw std::invalid_argument("config: ane schedule needs m_ref");
      if (schedule.calib_steps < 1)
        throw std::invalid_argument("config: ane schedule needs calib_steps >= 1");
      break;
    case Kind::core_palm:
      if (!(schedule.alpha > 0.0 && schedule.alpha < 1.0))
        throw std::invalid_argument("config: core-palm needs 0 < alpha < 1");
      break;
    case Kind::halo_palm:
      if (!(schedule.alpha > 1.0))
        throw std::invalid_argument("config: halo-palm needs alpha > 1");
      break;
    case Kind::core_willshaw:
      if (!(schedule.alpha > 0.0 && schedule.alpha < 1.0))
        throw std::invalid_argument("config: core-willshaw needs 0 < alpha < 1");
      if (!schedule.lambda_est2 && schedule.m_ref < 1)
        throw std::invalid_argument(
            "config: core-willshaw needs lambda_est2 or m_ref for measurement");
      break;
    case Kind::halo_willshaw:
      if (!(schedule.alpha > 1.0))
        throw std::invalid_argument("config: halo-willshaw needs alpha > 1");
      if (!schedule.kappa_est2 && schedule.m_ref < 1)
        throw std::invalid_argument(
            "config: halo-willshaw needs kappa_est2 or m_ref for measurement");
      break;
  }
  if (schedule.beta < 0.0 || schedule.beta > 1.0)
    throw std::invalid_argument("config: schedule beta outside [0,1]");
  if (selection_set) {
    const Selection eff = effective_selection();
    if (eff != selection)
      throw std::invalid_argument("config: selection contradicts the schedule kind");
  }
}

std::string ExperimentConfig::schedule_descriptor() const {
  using Kind = ScheduleSpec::Kind;
  std::string common = std::string(",sel=") + bam::to_string(effective_selection()) +
                       ",tmax=" + std::to_string(t_max) + ")";
  switch (schedule.kind) {
    case Kind::constant:
      return "constant(lest=" + fmt_param(step1_lambda_est()) +
             ",kest=" + fmt_param(step1_kappa_est()) + ",alpha=" + fmt_param(schedule.alpha) +
             common;
    case Kind::ane:
      return "ane(mref=" + std::to_string(schedule.m_ref) +
             ",lest1=" + fmt_param(step1_lambda_est()) +
             ",kest1=" + fmt_param(step1_kappa_est()) +
             ",steps=" + std::to_string(schedule.calib_steps) + common;
    case Kind::core_palm:
      return "core-palm(alpha=" + fmt_param(schedule.alpha) +
             ",beta=" + fmt_param(schedule.beta) + common;
    case Kind::halo_palm:
      return "halo-palm(alpha=" + fmt_param(schedule.alpha) +
             ",beta=" + fmt_param(schedule.beta) + common;
    case Kind::core_willshaw:
      return "core-willshaw(alpha=" + fmt_param(schedule.alpha) + ",lest2=" +
             (schedule.lambda_est2 ? fmt_param(*schedule.lambda_est2)
                                   : "measured@" + std::to_string(schedule.m_ref)) +
             ",beta=" + fmt_param(schedule.beta) + common;
    case Kind::halo_willshaw:
      return "halo-willshaw(alpha=" + fmt_param(schedule.alpha) + ",kest2=" +
             (schedule.kappa_est2 ? fmt_param(*schedule.kappa_est2)
                                  : "measured@" + std::to_string(schedule.m_ref)) +
             ",beta=" + fmt_param(schedule.beta) + common;
  }
  return "?";
}

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) ok = true;
    if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

ScheduleSpec parse_schedule(const json& obj) {
  check_keys(obj,
             {"kind", "lambda_est", "kappa_est", "alpha", "m_ref", "calib_steps", "beta",
              "lambda_est2", "kappa_est2"},
             "schedule");
  ScheduleSpec spec;
  spec.kind = ScheduleSpec::kind_from_string(obj.at("kind").get<std::string>());
  if (obj.contains("lambda_est")) spec.lambda_est = obj["lambda_est"].get<double>();
  if (obj.contains("kappa_est")) spec.kappa_est = obj["kappa_est"].get<double>();
  if (obj.contains("alpha")) spec.alpha = obj["alpha"].get<double>();
  if (obj.contains("m_ref")) spec.m_ref = obj["m_ref"].get<int>();
  if (obj.contains("calib_steps")) spec.calib_steps = obj["calib_steps"].get<int>();
  if (obj.contains("beta")) spec.beta = obj["beta"].get<double>();
  auto est2 = [&](const char* key) -> std::optional<double> {
    if (!obj.contains(key)) return std::nullopt;
    if (obj[key].is_string()) {
      if (obj[key].get<std::string>() == "measured") return std::nullopt;
      throw std::invalid_argument(std::string("config: ") + key + " must be a number or \"measured\"");
    }
    return obj[key].get<double>();
  };
  spec.lambda_est2 = est2("lambda_est2");
  spec.kappa_est2 = est2("kappa_est2");
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(obj,
             {"mode", "family", "rules", "n", "k", "m_grid", "lambda", "kappa", "schedule",
              "selection", "eta", "t_max", "n_networks", "n_queries", "seed", "output"},
             "config");
  ExperimentConfig cfg;
  if (obj.contains("mode")) cfg.mode = mode_from_string(obj["mode"].get<std::string>());
  cfg.family = family_from_string(obj.at("family").get<std::string>());
  for (const auto& r : obj.at("rules")) cfg.rules.push_back(rule_from_string(r.get<std::string>()));
  cfg.n = obj.at("n").get<int>();
  cfg.k = obj.at("k").get<int>();
  for (const auto& m : obj.at("m_grid")) cfg.m_grid.push_back(m.get<int>());
  cfg.lambda = obj.at("lambda").get<double>();
  cfg.kappa = obj.at("kappa").get<double>();
  if (obj.contains("schedule")) cfg.schedule = parse_schedule(obj["schedule"]);
  if (obj.contains("selection")) {
    cfg.selection = selection_from_string(obj["selection"].get<std::string>());
    cfg.selection_set = true;
  }
  if (obj.contains("eta") && !obj["eta"].is_null()) cfg.eta = obj["eta"].get<double>();
  if (obj.contains("t_max")) cfg.t_max = obj["t_max"].get<int>();
  if (obj.contains("n_networks")) cfg.n_networks = obj["n_networks"].get<int>();
  if (obj.contains("n_queries")) cfg.n_queries = obj["n_queries"].get<int>();
  if (obj.contains("seed")) cfg.seed = obj["seed"].get<std::uint64_t>();
  if (obj.contains("output")) cfg.output = obj["output"].get<std::string>();
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return from_json(text.str());
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

CalibrationResult run_calibration(const ExperimentConfig& cfg, Rule rule, Exec exec) {
  if (cfg.schedule.kind != ScheduleSpec::Kind::ane)
    throw std::invalid_argument("run_calibration: config schedule is not ane");
  std::vector<PatternSet> networks;
  networks.reserve(cfg.n_networks);
  for (int net = 0; net < cfg.n_networks; ++net)
    networks.push_back(gen_patterns(
        cfg.n, cfg.k, cfg.schedule.m_ref, cfg.family,
        derive_stream(cfg.seed, StreamKind::pattern_set,
                      static_cast<std::uint64_t>(cfg.schedule.m_ref),
                      static_cast<std::uint64_t>(net))));
  CalibrationInput in{networks,   rule,
                      cfg.eta,    cfg.lambda,
                      cfg.kappa,  cfg.step1_lambda_est(),
                      cfg.step1_kappa_est()};
  in.selection = cfg.effective_selection();
  in.queries_per_network = cfg.n_queries;
  in.master_seed = cfg.seed;
  in.steps = cfg.schedule.calib_steps;
  in.exec = exec;
  return calibrate_ane(in);
}

namespace {

// Ensemble-mean step-1 output noise of the core/halo Willshaw first step,
// used when the step-2 estimate is not given as a fixed hyperparameter.
CalibrationStep measure_step1(const ExperimentConfig& cfg, Rule rule, Exec exec) {
  std::vector<PatternSet> networks;
  networks.reserve(cfg.n_networks);
  for (int net = 0; net < cfg.n_networks; ++net)
    networks.push_back(gen_patterns(
        cfg.n, cfg.k, cfg.schedule.m_ref, cfg.family,
        derive_stream(cfg.seed, StreamKind::pattern_set,
                      static_cast<std::uint64_t>(cfg.schedule.m_ref),
                      static_cast<std::uint64_t>(net))));
  CalibrationInput in{networks, rule, cfg.eta, cfg.lambda, cfg.kappa, cfg.lambda, cfg.kappa};
  in.alpha1 = cfg.schedule.alpha;
  in.selection = cfg.effective_selection();
  in.queries_per_network = cfg.n_queries;
  in.master_seed = cfg.seed;
  in.steps = 1;
  in.exec = exec;
  return calibrate_ane(in).steps.front();
}

}  // namespace

RetrievalSchedule resolve_schedule(const ExperimentConfig& cfg, Rule rule, Exec exec) {
  using Kind = ScheduleSpec::Kind;
  switch (cfg.schedule.kind) {
    case Kind::constant:
      return RetrievalSchedule::constant(cfg.step1_lambda_est(), cfg.step1_kappa_est(),
                                         cfg.schedule.alpha, cfg.effective_selection());
    case Kind::ane:
      return run_calibration(cfg, rule, exec).schedule();
    case Kind::core_palm:
      return RetrievalSchedule::core_palm(cfg.lambda, cfg.kappa, cfg.schedule.alpha,
                                          cfg.schedule.beta);
    case Kind::halo_palm:
      return RetrievalSchedule::halo_palm(cfg.lambda, cfg.kappa, cfg.schedule.alpha,
                                          cfg.schedule.beta);
    case Kind::core_willshaw: {
      const double lest2 = cfg.schedule.lambda_est2
                               ? *cfg.schedule.lambda_est2
                               : measure_step1(cfg, rule, exec).lambda_out;
      return RetrievalSchedule::core_willshaw(cfg.lambda, cfg.kappa, cfg.schedule.alpha, lest2,
                                              cfg.schedule.beta);
    }
    case Kind::halo_willshaw: {
      const double kest2 = cfg.schedule.kappa_est2
                               ? *cfg.schedule.kappa_est2
                               : measure_step1(cfg, rule, exec).kappa_out;
      return RetrievalSchedule::halo_willshaw(cfg.lambda, cfg.kappa, cfg.schedule.alpha, kest2,
                                              cfg.schedule.beta);
    }
  }
  throw std::logic_error("resolve_schedule: unreachable");
}

std::vector<int> reported_steps(int t_max) {
  std::vector<int> steps;
  for (int t = 1; t <= std::min(10, t_max); ++t) steps.push_back(t);
  if (t_max > 10) steps.push_back(t_max);
  return steps;
}

std::vector<std::vector<TrialMetrics>> run_cell(const ExperimentConfig& cfg,
                                                const RetrievalSchedule& schedule, Rule rule,
                                                int M, int network) {
  const auto steps = reported_steps(cfg.t_max);
  const auto m64 = static_cast<std::uint64_t>(M);
  const auto net64 = static_cast<std::uint64_t>(network);
  std::vector<std::vector<TrialMetrics>> out(
      steps.size(), std::vector<TrialMetrics>(static_cast<std::size_t>(cfg.n_queries)));

  const PatternSet addr = gen_patterns(
      cfg.n, cfg.k, M, cfg.family, derive_stream(cfg.seed, StreamKind::pattern_set, m64, net64));
  const QuerySpec qspec(cfg.lambda, cfg.kappa, cfg.n, cfg.k);

  if (cfg.mode == Mode::auto_assoc) {
    const CounterStore counters = store(addr, Mode::auto_assoc);
    ModelCache cache(counters, rule, cfg.k, cfg.eta, Exec::serial);
    IterateOptions opts;
    opts.t_max = cfg.t_max;
    opts.k = cfg.k;
    opts.record_outputs = false;
    for (int q = 0; q < cfg.n_queries; ++q) {
      const auto q64 = static_cast<std::uint64_t>(q);
      SplitMix64 pick(derive_stream(cfg.seed, StreamKind::target_pick, m64, net64, q64));
      const int mu = static_cast<int>(pick.next_below(static_cast<std::uint64_t>(M)));
      const auto target = addr.pattern(mu);
      const auto query = make_query(target, qspec, cfg.family,
                                    derive_stream(cfg.seed, StreamKind::query, m64, net64, q64));
      const RetrievalTrace trace = iterate(cache, schedule, query, target, opts);
      for (std::size_t si = 0; si < steps.size(); ++si) {
        const auto [f10, f01] = trace.error_at(steps[si]);
        out[si][q] = TrialMetrics::from_errors(f10, f01, cfg.k, trace.steps_used());
      }
    }
    return out;
  }

  // Hetero-association is one-step; iteration is only defined for the
  // auto-associative networks.
  const PatternSet content =
      gen_patterns(cfg.n, cfg.k, M, cfg.family,
                   derive_stream(cfg.seed, StreamKind::content_set, m64, net64));
  const CounterStore counters = store(addr, Mode::hetero, &content);
  ModelCache cache(counters, rule, cfg.k, cfg.eta, Exec::serial);
  const ScheduleStep& st = schedule.step(1);
  const WeightModel& model = cache.get(st.lambda_est, st.kappa_est);
  for (int q = 0; q < cfg.n_queries; ++q) {
    const auto q64 = static_cast<std::uint64_t>(q);
    SplitMix64 pick(derive_stream(cfg.seed, StreamKind::target_pick, m64, net64, q64));
    const int mu = static_cast<int>(pick.next_below(static_cast<std::uint64_t>(M)));
    const auto query = make_query(addr.pattern(mu), qspec, cfg.family,
                                  derive_stream(cfg.seed, StreamKind::query, m64, net64, q64));
    const auto output = one_step(model, query, st.selection, st.alpha, cfg.k);
    const auto [f10, f01] = component_errors(content.pattern(mu), output);
    out[0][q] = TrialMetrics::from_errors(f10, f01, cfg.k, 1);
  }
  return out;
}

namespace {

const char* kCsvHeader =
    "rule,mode,family,n,k,M,lambda,kappa,schedule,eta,step,eps_mean,p_corr,f10_mean,f01_mean,"
    "lambda_out,kappa_out,iters_mean,n_networks,n_queries,seed";

}  // namespace

std::string sweep_csv(const ExperimentConfig& cfg, Exec exec) {
  cfg.validate();

  std::vector<RetrievalSchedule> schedules;
  schedules.reserve(cfg.rules.size());
  for (Rule rule : cfg.rules) schedules.push_back(resolve_schedule(cfg, rule, exec));

  const auto steps = reported_steps(cfg.t_max);
  const int n_rules = static_cast<int>(cfg.rules.size());
  const int n_m = static_cast<int>(cfg.m_grid.size());
  const int n_cells = n_rules * n_m * cfg.n_networks;

  std::vector<std::vector<std::vector<TrialMetrics>>> cells(
      static_cast<std::size_t>(n_cells));
  std::vector<std::string> cell_errors(static_cast<std::size_t>(n_cells));

  auto run_one = [&](int c) {
    const int rule_idx = c / (n_m * cfg.n_networks);
    const int m_idx = (c / cfg.n_networks) % n_m;
    const int net = c % cfg.n_networks;
    try {
      cells[c] = run_cell(cfg, schedules[rule_idx], cfg.rules[rule_idx], cfg.m_grid[m_idx], net);
    } catch (const std::exception& e) {
      cell_errors[c] = e.what();
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < n_cells; ++c) run_one(c);
  } else {
    for (int c = 0; c < n_cells; ++c) run_one(c);
  }
  for (const std::string& err : cell_errors)
    if (!err.empty()) throw std::runtime_error("sweep: " + err);

  const std::string schedule_desc = csv_escape(cfg.schedule_descriptor());
  const std::string eta_field = cfg.eta ? fmt_param(*cfg.eta) : "";

  std::string out;
  out += kCsvHeader;
  out += '\n';
  std::vector<TrialMetrics> trials(
      static_cast<std::size_t>(cfg.n_networks) * cfg.n_queries);
  for (int rule_idx = 0; rule_idx < n_rules; ++rule_idx) {
    for (int m_idx = 0; m_idx < n_m; ++m_idx) {
      for (std::size_t si = 0; si < steps.size(); ++si) {
        std::size_t t = 0;
        for (int net = 0; net < cfg.n_networks; ++net) {
          const auto& cell = cells[(rule_idx * n_m + m_idx) * cfg.n_networks + net];
          for (int q = 0; q < cfg.n_queries; ++q) trials[t++] = cell[si][q];
        }
        const CellSummary s = summarize(trials, cfg.k);
        out += to_string(cfg.rules[rule_idx]);
        out += ',';
        out += to_string(cfg.mode);
        out += ',';
        out += to_string(cfg.family);
        out += ',';
        out += std::to_string(cfg.n);
        out += ',';
        out += std::to_string(cfg.k);
        out += ',';
        out += std::to_string(cfg.m_grid[m_idx]);
        out += ',';
        out += fmt_param(cfg.lambda);
        out += ',';
        out += fmt_param(cfg.kappa);
        out += ',';
        out += schedule_desc;
        out += ',';
        out += eta_field;
        out += ',';
        out += std::to_string(steps[si]);
        out += ',';
        out += fmt_metric(s.eps_mean);
        out += ',';
        out += fmt_metric(s.p_corr);
        out += ',';
        out += fmt_metric(s.f10_mean);
        out += ',';
        out += fmt_metric(s.f01_mean);
        out += ',';
        out += fmt_metric(s.lambda_out);
        out += ',';
        out += fmt_metric(s.kappa_out);
        out += ',';
        out += fmt_metric(s.iters_mean);
        out += ',';
        out += std::to_string(cfg.n_networks);
        out += ',';
        out += std::to_string(cfg.n_queries);
        out += ',';
        out += std::to_string(cfg.seed);
        out += '\n';
      }
    }
  }
  return out;
}

void sweep(const ExperimentConfig& cfg, Exec exec) {
  if (cfg.output.empty()) throw std::invalid_argument("sweep: config has no output path");
  const std::string csv = sweep_csv(cfg, exec);
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw std::runtime_error("sweep: cannot open output file " + cfg.output);
  out << csv;
  if (!out) throw std::runtime_error("sweep: write failed for " + cfg.output);
}

CapacityCriterion CapacityCriterion::parse(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("criterion: expected metric:threshold, got " + s);
  const std::string name = s.substr(0, colon);
  CapacityCriterion crit;
  try {
    crit.threshold = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("criterion: bad threshold in " + s);
  }
  if (name == "eps") {
    crit.kind = CriterionKind::at_most;
    crit.column = "eps_mean";
  } else if (name == "pcorr") {
    crit.kind = CriterionKind::at_least;
    crit.column = "p_corr";
  } else {
    throw std::invalid_argument("criterion: unknown metric " + name);
  }
  return crit;
}

std::vector<CapacityRow> capacity_report(const CsvTable& table, const CapacityCriterion& crit) {
  const int rule_col = table.column("rule");
  const int sched_col = table.column("schedule");
  const int step_col = table.column("step");
  const int m_col = table.column("M");
  const int value_col = table.column(crit.column);
  if (rule_col < 0 || sched_col < 0 || step_col < 0 || m_col < 0 || value_col < 0)
    throw std::invalid_argument("capacity_report: missing column in CSV");

  struct Group {
    CapacityRow row;
    std::vector<std::pair<double, double>> samples;
  };
  std::vector<Group> groups;
  std::map<std::tuple<std::string, std::string, int>, std::size_t> index;
  for (const auto& row : table.rows) {
    const int step = std::stoi(row[step_col]);
    const auto key = std::make_tuple(row[rule_col], row[sched_col], step);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({{row[rule_col], row[sched_col], step, false, 0.0}, {}});
    }
    groups[it->second].samples.emplace_back(std::stod(row[m_col]), std::stod(row[value_col]));
  }

  std::vector<CapacityRow> out;
  out.reserve(groups.size());
  for (Group& g : groups) {
    std::sort(g.samples.begin(), g.samples.end());
    const double cap = capacity(g.samples, crit.kind, crit.threshold);
    g.row.below_grid = cap == 0.0;
    g.row.capacity = cap;
    out.push_back(g.row);
  }
  return out;
}

std::string capacity_report_csv(const CsvTable& table, const CapacityCriterion& crit) {
  std::string out = "rule,schedule,step,capacity\n";
  for (const CapacityRow& row : capacity_report(table, crit)) {
    out += row.rule;
    out += ',';
    out += csv_escape(row.schedule);
    out += ',';
    out += std::to_string(row.step);
    out += ',';
    out += row.below_grid ? "below-grid" : fmt_metric(row.capacity);
    out += '\n';
  }
  return out;
}

void dump_weights(const WeightModel& model, std::ostream& out) {
  out << "i,j,fin,inf\n";
  char buf[64];
  for (int i = 0; i < model.n_in; ++i) {
    for (int j = 0; j < model.n_out; ++j) {
      const ExtendedReal w = model.weight(i, j);
      std::snprintf(buf, sizeof buf, "%.17g", w.fin);
      out << i << ',' << j << ',' << buf << ',' << w.inf << '\n';
    }
  }
}

}  // namespace bam
