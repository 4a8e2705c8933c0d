#include "bam/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bam/metrics.hpp"
#include "bam/rng.hpp"

namespace bam {

const char* to_string(Selection s) { return s == Selection::kwta ? "kwta" : "threshold"; }

Selection selection_from_string(const std::string& s) {
  if (s == "kwta") return Selection::kwta;
  if (s == "threshold") return Selection::threshold;
  throw std::invalid_argument("unknown selection: " + s);
}

RetrievalSchedule RetrievalSchedule::constant(double lambda_est, double kappa_est, double alpha,
                                              Selection sel) {
  if (!(alpha > 0.0)) throw std::invalid_argument("schedule: alpha must be positive");
  RetrievalSchedule s;
  s.tail_ = {lambda_est, kappa_est, alpha, sel};
  return s;
}

RetrievalSchedule RetrievalSchedule::calibrated(
    std::span<const std::pair<double, double>> estimates, Selection sel) {
  if (estimates.empty()) throw std::invalid_argument("schedule: no calibrated steps");
  RetrievalSchedule s;
  for (const auto& [lam, kap] : estimates) s.steps_.push_back({lam, kap, 1.0, sel});
  s.tail_ = s.steps_.back();
  return s;
}

namespace {
void check_beta(double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("schedule: beta outside [0,1]");
}
}  // namespace

RetrievalSchedule RetrievalSchedule::core_palm(double lambda, double kappa, double alpha,
                                               double beta) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("core_palm: need 0 < alpha < 1");
  check_beta(beta);
  RetrievalSchedule s;
  s.steps_.push_back({lambda, kappa, alpha, Selection::kwta});
  s.steps_.push_back({alpha, 0.0, 1.0, Selection::kwta});
  s.tail_ = {1.0 - beta, beta, 1.0, Selection::kwta};
  return s;
}

RetrievalSchedule RetrievalSchedule::halo_palm(double lambda, double kappa, double alpha,
                                               double beta) {
  if (!(alpha > 1.0)) throw std::invalid_argument("halo_palm: need alpha > 1");
  check_beta(beta);
  RetrievalSchedule s;
  s.steps_.push_back({lambda, kappa, alpha, Selection::kwta});
  s.steps_.push_back({0.0, alpha - 1.0, 1.0, Selection::kwta});
  s.tail_ = {1.0 - beta, beta, 1.0, Selection::kwta};
  return s;
}

RetrievalSchedule RetrievalSchedule::core_willshaw(double lambda, double kappa, double alpha,
                                                   double lambda_est2, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("core_willshaw: need 0 < alpha < 1");
  check_beta(beta);
  RetrievalSchedule s;
  s.steps_.push_back({lambda, kappa, alpha, Selection::threshold});
  s.steps_.push_back({lambda_est2, 0.0, 1.0, Selection::threshold});
  s.tail_ = {1.0 - beta, beta, 1.0, Selection::threshold};
  return s;
}

RetrievalSchedule RetrievalSchedule::halo_willshaw(double lambda, double kappa, double alpha,
                                                   double kappa_est2, double beta) {
  if (!(alpha > 1.0)) throw std::invalid_argument("halo_willshaw: need alpha > 1");
  check_beta(beta);
  RetrievalSchedule s;
  s.steps_.push_back({lambda, kappa, alpha, Selection::threshold});
  s.steps_.push_back({0.0, kappa_est2, 1.0, Selection::threshold});
  s.tail_ = {1.0 - beta, beta, 1.0, Selection::threshold};
  return s;
}

void compute_potentials(const WeightModel& model, std::span<const std::uint8_t> query,
                        PotentialField& out) {
  const int n_in = model.n_in;
  const int n_out = model.n_out;
  if (static_cast<int>(query.size()) != n_in)
    throw std::invalid_argument("potentials: query length != n_in");

  out.fin.assign(model.bias_fin.begin(), model.bias_fin.end());
  out.inf.assign(model.bias_inf.begin(), model.bias_inf.end());
  out.inf_active = model.weights_have_inf || model.bias_has_inf;

  double* fin = out.fin.data();
  for (int i = 0; i < n_in; ++i) {
    if (!query[i]) continue;
    const double* row = model.w_fin.data() + static_cast<std::size_t>(i) * n_out;
    for (int j = 0; j < n_out; ++j) fin[j] += row[j];
  }
  if (model.weights_have_inf) {
    std::int32_t* inf = out.inf.data();
    for (int i = 0; i < n_in; ++i) {
      if (!query[i]) continue;
      const std::int32_t* row = model.w_inf.data() + static_cast<std::size_t>(i) * n_out;
      for (int j = 0; j < n_out; ++j) inf[j] += row[j];
    }
  }
}

std::vector<ExtendedReal> potentials(const WeightModel& model,
                                     std::span<const std::uint8_t> query) {
  PotentialField field;
  compute_potentials(model, query, field);
  std::vector<ExtendedReal> x(field.fin.size());
  for (int j = 0; j < field.size(); ++j) x[j] = field.at(j);
  return x;
}

std::vector<ExtendedReal> potentials(const DaleShifted& dale,
                                     std::span<const std::uint8_t> query) {
  PotentialField field;
  compute_potentials(dale.model, query, field);
  const double active =
      static_cast<double>(std::count(query.begin(), query.end(), std::uint8_t{1}));
  std::vector<ExtendedReal> x(field.fin.size());
  for (int j = 0; j < field.size(); ++j) {
    x[j] = field.at(j);
    x[j].fin -= dale.shift * active;
  }
  return x;
}

void kwta_select(const PotentialField& x, int K, std::vector<std::uint8_t>& out) {
  const int n = x.size();
  if (K < 1 || K > n) throw std::invalid_argument("kwta_select: need 1 <= K <= n");
  out.assign(n, 0);
  if (K == n) {
    std::fill(out.begin(), out.end(), std::uint8_t{1});
    return;
  }
  if (!x.inf_active) {
    std::vector<double> vals(x.fin);
    std::nth_element(vals.begin(), vals.begin() + (K - 1), vals.end(), std::greater<>());
    const double v = vals[K - 1];
    for (int j = 0; j < n; ++j) out[j] = x.fin[j] >= v ? 1 : 0;
    return;
  }
  std::vector<std::pair<std::int32_t, double>> vals(n);
  for (int j = 0; j < n; ++j) vals[j] = {x.inf[j], x.fin[j]};
  std::nth_element(vals.begin(), vals.begin() + (K - 1), vals.end(), std::greater<>());
  const auto v = vals[K - 1];
  for (int j = 0; j < n; ++j)
    out[j] = std::pair<std::int32_t, double>{x.inf[j], x.fin[j]} >= v ? 1 : 0;
}

std::vector<std::uint8_t> kwta_select(std::span<const ExtendedReal> x, int K) {
  PotentialField field;
  field.fin.resize(x.size());
  field.inf.resize(x.size());
  field.inf_active = true;
  for (std::size_t j = 0; j < x.size(); ++j) {
    field.fin[j] = x[j].fin;
    field.inf[j] = x[j].inf;
  }
  std::vector<std::uint8_t> out;
  kwta_select(field, K, out);
  return out;
}

void threshold_select(const PotentialField& x, double alpha, std::vector<std::uint8_t>& out) {
  if (!(alpha > 0.0)) throw std::invalid_argument("threshold_select: alpha must be positive");
  const double thr = -std::log(alpha);
  const int n = x.size();
  out.assign(n, 0);
  if (!x.inf_active) {
    for (int j = 0; j < n; ++j) out[j] = x.fin[j] >= thr ? 1 : 0;
    return;
  }
  for (int j = 0; j < n; ++j)
    out[j] = (x.inf[j] > 0 || (x.inf[j] == 0 && x.fin[j] >= thr)) ? 1 : 0;
}

std::vector<std::uint8_t> threshold_select(std::span<const ExtendedReal> x, double alpha) {
  PotentialField field;
  field.fin.resize(x.size());
  field.inf.resize(x.size());
  field.inf_active = true;
  for (std::size_t j = 0; j < x.size(); ++j) {
    field.fin[j] = x[j].fin;
    field.inf[j] = x[j].inf;
  }
  std::vector<std::uint8_t> out;
  threshold_select(field, alpha, out);
  return out;
}

namespace {
int kwta_count(double alpha, int k, int n) {
  const long K = std::lround(alpha * static_cast<double>(k));
  return static_cast<int>(std::clamp<long>(K, 1, n));
}
}  // namespace

std::vector<std::uint8_t> one_step(const WeightModel& model, std::span<const std::uint8_t> query,
                                   Selection sel, double alpha, int k) {
  PotentialField field;
  compute_potentials(model, query, field);
  std::vector<std::uint8_t> out;
  if (sel == Selection::kwta)
    kwta_select(field, kwta_count(alpha, k, model.n_out), out);
  else
    threshold_select(field, alpha, out);
  return out;
}

ModelCache::ModelCache(const CounterStore& store, Rule rule, int k, std::optional<double> eta,
                       Exec exec)
    : store_(store), rule_(rule), k_(k), eta_(eta), exec_(exec) {
  if (k < 1) throw std::invalid_argument("ModelCache: need k >= 1");
}

const WeightModel& ModelCache::get(double lambda_est, double kappa_est) {
  for (const auto& [key, model] : entries_)
    if (key.first == lambda_est && key.second == kappa_est) return *model;
  const NoiseEstimate est =
      NoiseEstimate::from_rates(lambda_est, kappa_est, store_.n_in(), k_);
  auto model = std::make_unique<WeightModel>();
  if (eta_)
    *model = build_model(rule_, stabilize(store_, *eta_), est, exec_);
  else
    *model = build_model(rule_, store_, est, exec_);
  entries_.emplace_back(std::make_pair(lambda_est, kappa_est), std::move(model));
  return *entries_.back().second;
}

RetrievalTrace iterate(ModelCache& cache, const RetrievalSchedule& schedule,
                       std::span<const std::uint8_t> query, std::span<const std::uint8_t> target,
                       const IterateOptions& opts) {
  const CounterStore& cs = cache.store();
  if (cs.mode() != Mode::auto_assoc)
    throw std::invalid_argument("iterate: auto-associative store required");
  if (opts.t_max < 1) throw std::invalid_argument("iterate: need t_max >= 1");
  if (opts.k < 1) throw std::invalid_argument("iterate: need k >= 1");
  const int n = cs.n_out();
  if (static_cast<int>(query.size()) != n || static_cast<int>(target.size()) != n)
    throw std::invalid_argument("iterate: pattern length mismatch");

  RetrievalTrace trace;
  std::vector<std::uint8_t> prev(query.begin(), query.end());
  std::vector<std::uint8_t> cur;
  PotentialField field;

  for (int t = 1; t <= opts.t_max; ++t) {
    const ScheduleStep& st = schedule.step(t);
    const WeightModel& model = cache.get(st.lambda_est, st.kappa_est);
    compute_potentials(model, prev, field);
    if (st.selection == Selection::kwta)
      kwta_select(field, kwta_count(st.alpha, opts.k, n), cur);
    else
      threshold_select(field, st.alpha, cur);

    trace.step_errors.push_back(component_errors(target, cur));
    if (opts.record_outputs) trace.outputs.push_back(cur);
    trace.steps_executed = t;
    if (cur == prev) {
      trace.converged_at = t;
      break;
    }
    std::swap(prev, cur);
  }
  trace.final_output = std::move(prev);
  return trace;
}

RetrievalTrace iterate(const CounterStore& store, Rule rule, const RetrievalSchedule& schedule,
                       std::span<const std::uint8_t> query, std::span<const std::uint8_t> target,
                       const IterateOptions& opts, std::optional<double> eta) {
  ModelCache cache(store, rule, opts.k, eta);
  return iterate(cache, schedule, query, target, opts);
}

RetrievalSchedule CalibrationResult::schedule() const {
  std::vector<std::pair<double, double>> ests;
  ests.reserve(steps.size());
  for (const auto& s : steps) ests.emplace_back(s.lambda_est, s.kappa_est);
  return RetrievalSchedule::calibrated(ests, selection);
}

CalibrationResult calibrate_ane(const CalibrationInput& in) {
  if (in.networks.empty()) throw std::invalid_argument("calibrate_ane: empty ensemble");
  if (in.queries_per_network < 1)
    throw std::invalid_argument("calibrate_ane: need at least one query per network");
  if (in.steps < 1) throw std::invalid_argument("calibrate_ane: need steps >= 1");

  const int nets = static_cast<int>(in.networks.size());
  const int n = in.networks[0].n;
  const int k = in.networks[0].k;
  const Family family = in.networks[0].family;
  const QuerySpec qspec(in.lambda, in.kappa, n, k);

  struct NetState {
    CounterStore counters;
    std::vector<std::vector<std::uint8_t>> states;  // one per query trial
    std::vector<std::span<const std::uint8_t>> targets;
    // per-step partial sums, combined in network order
    std::int64_t f10_sum = 0, f01_sum = 0, exact = 0;
  };
  std::vector<NetState> net_states;
  net_states.reserve(nets);
  for (int net = 0; net < nets; ++net) {
    const PatternSet& ps = in.networks[net];
    NetState st{store(ps, Mode::auto_assoc), {}, {}};
    const auto m_ref = static_cast<std::uint64_t>(ps.M);
    for (int q = 0; q < in.queries_per_network; ++q) {
      SplitMix64 pick(derive_stream(in.master_seed, StreamKind::target_pick, m_ref,
                                    static_cast<std::uint64_t>(net),
                                    static_cast<std::uint64_t>(q)));
      const int mu = static_cast<int>(pick.next_below(static_cast<std::uint64_t>(ps.M)));
      st.targets.push_back(ps.pattern(mu));
      st.states.push_back(make_query(ps.pattern(mu), qspec, family,
                                     derive_stream(in.master_seed, StreamKind::query, m_ref,
                                                   static_cast<std::uint64_t>(net),
                                                   static_cast<std::uint64_t>(q))));
    }
    net_states.push_back(std::move(st));
  }

  const double trials =
      static_cast<double>(nets) * static_cast<double>(in.queries_per_network);
  CalibrationResult result;
  result.selection = in.selection;

  double lambda_est = in.lambda_est1;
  double kappa_est = in.kappa_est1;
  for (int t = 1; t <= in.steps; ++t) {
    const NoiseEstimate est = NoiseEstimate::from_rates(lambda_est, kappa_est, n, k);

    auto run_net = [&](int net) {
      NetState& st = net_states[net];
      WeightModel model;
      if (in.eta)
        model = build_model(in.rule, stabilize(st.counters, *in.eta), est, Exec::serial);
      else
        model = build_model(in.rule, st.counters, est, Exec::serial);
      PotentialField field;
      std::vector<std::uint8_t> out;
      st.f10_sum = st.f01_sum = st.exact = 0;
      const double alpha = t == 1 ? in.alpha1 : 1.0;
      for (std::size_t trial = 0; trial < st.states.size(); ++trial) {
        compute_potentials(model, st.states[trial], field);
        if (in.selection == Selection::kwta)
          kwta_select(field, kwta_count(alpha, k, n), out);
        else
          threshold_select(field, alpha, out);
        st.states[trial] = out;
        const auto [f10, f01] = component_errors(st.targets[trial], out);
        st.f10_sum += f10;
        st.f01_sum += f01;
        if (f10 == 0 && f01 == 0) ++st.exact;
      }
    };

    if (in.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
      for (int net = 0; net < nets; ++net) run_net(net);
    } else {
      for (int net = 0; net < nets; ++net) run_net(net);
    }

    std::int64_t f10_total = 0, f01_total = 0, exact_total = 0;
    for (const NetState& st : net_states) {
      f10_total += st.f10_sum;
      f01_total += st.f01_sum;
      exact_total += st.exact;
    }
    CalibrationStep step;
    step.lambda_est = lambda_est;
    step.kappa_est = kappa_est;
    step.f10_mean = static_cast<double>(f10_total) / trials;
    step.f01_mean = static_cast<double>(f01_total) / trials;
    step.eps = (step.f10_mean + step.f01_mean) / static_cast<double>(k);
    step.p_corr = static_cast<double>(exact_total) / trials;
    step.lambda_out = 1.0 - step.f10_mean / static_cast<double>(k);
    step.kappa_out = step.f01_mean / static_cast<double>(k);
    result.steps.push_back(step);

    lambda_est = step.lambda_out;
    kappa_est = step.kappa_out;
  }
  return result;
}

}  // namespace bam
