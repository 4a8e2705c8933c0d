#include "bam/rules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>

namespace bam {

const char* to_string(Rule r) {
  switch (r) {
    case Rule::bayes: return "B";
    case Rule::bcpnn: return "BCPNN";
    case Rule::bcpnn2: return "BCPNN2";
    case Rule::bcpnn3: return "BCPNN3";
  }
  return "?";
}

Rule rule_from_string(const std::string& s) {
  if (s == "B" || s == "bayes" || s == "Bayes") return Rule::bayes;
  if (s == "BCPNN" || s == "bcpnn") return Rule::bcpnn;
  if (s == "BCPNN2" || s == "bcpnn2") return Rule::bcpnn2;
  if (s == "BCPNN3" || s == "bcpnn3") return Rule::bcpnn3;
  throw std::invalid_argument("unknown rule: " + s);
}

NoiseEstimate NoiseEstimate::from_rates(double lambda_est, double kappa_est, int n, int k) {
  NoiseEstimate e;
  e.lambda_est = lambda_est;
  e.kappa_est = kappa_est;
  e.p10 = 1.0 - lambda_est;
  e.p01 = n == k ? 0.0 : kappa_est * static_cast<double>(k) / static_cast<double>(n - k);
  if (e.p10 < 0.0 || e.p10 > 1.0 || e.p01 < 0.0 || e.p01 > 1.0)
    throw std::invalid_argument("NoiseEstimate: probabilities outside [0,1]");
  return e;
}

NoiseEstimate NoiseEstimate::from_probs(double p10, double p01) {
  if (p10 < 0.0 || p10 > 1.0 || p01 < 0.0 || p01 > 1.0)
    throw std::invalid_argument("NoiseEstimate: probabilities outside [0,1]");
  NoiseEstimate e;
  e.p10 = p10;
  e.p01 = p01;
  e.lambda_est = 1.0 - p10;
  e.kappa_est = p01;
  return e;
}

StabilizedCounters::StabilizedCounters(const CounterStore& base, double eta)
    : base_(base), eta_(eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("stabilize: eta must be positive");
  const double m = static_cast<double>(base.pattern_count());
  const double eps_s = 1.0 / (1.0 + m);
  floor_ = eta * eps_s * eps_s * m;
}

namespace {

// Counter access shared by the builders. raw_pair feeds the derived chain,
// pair the direct M11 occurrences in the weight formulas (stabilization
// floors only the latter).
struct PlainSource {
  const CounterStore& s;
  double pair(int i, int j) const { return static_cast<double>(s.pair_usage(i, j)); }
  double raw_pair(int i, int j) const { return static_cast<double>(s.pair_usage(i, j)); }
};

struct StabilizedSource {
  const StabilizedCounters& s;
  double pair(int i, int j) const { return s.pair_usage(i, j); }
  double raw_pair(int i, int j) const { return static_cast<double>(s.base().pair_usage(i, j)); }
};

constexpr int kChunkRows = 64;

// Fills the weight planes row by row and accumulates the per-input bias
// terms into fixed 64-row chunk partials. The chunk grid is independent of
// the thread count, and partials are combined in chunk order, so serial and
// parallel builds are bit-identical.
template <typename Source, typename WeightFn, typename BiasTermFn>
void fill_rows(const CounterStore& base, const Source& src, const NoiseEstimate& est,
               Exec exec, WeightFn weight_fn, BiasTermFn bias_term_fn, WeightModel& model) {
  const int n_in = base.n_in();
  const int n_out = base.n_out();
  const double m_total = static_cast<double>(base.pattern_count());
  constexpr bool has_term = !std::is_same_v<BiasTermFn, std::nullptr_t>;

  const int n_chunks = (n_in + kChunkRows - 1) / kChunkRows;
  std::vector<double> part_fin;
  std::vector<std::int64_t> part_inf;
  if constexpr (has_term) {
    part_fin.assign(static_cast<std::size_t>(n_chunks) * n_out, 0.0);
    part_inf.assign(static_cast<std::size_t>(n_chunks) * n_out, 0);
  }

  auto run_chunk = [&](int chunk) {
    const int i_begin = chunk * kChunkRows;
    const int i_end = std::min(i_begin + kChunkRows, n_in);
    double* pf = has_term ? part_fin.data() + static_cast<std::size_t>(chunk) * n_out : nullptr;
    std::int64_t* pi =
        has_term ? part_inf.data() + static_cast<std::size_t>(chunk) * n_out : nullptr;
    for (int i = i_begin; i < i_end; ++i) {
      const double m1_i = static_cast<double>(base.unit_usage_in(i));
      const double m0_i = m_total - m1_i;
      double* wf = model.w_fin.data() + static_cast<std::size_t>(i) * n_out;
      std::int32_t* wi = model.w_inf.data() + static_cast<std::size_t>(i) * n_out;
      for (int j = 0; j < n_out; ++j) {
        const double m1_j = static_cast<double>(base.unit_usage_out(j));
        const double m0_j = m_total - m1_j;
        const double raw11 = src.raw_pair(i, j);
        SynapseCounters c;
        c.m11 = src.pair(i, j);
        c.m01 = m1_j - raw11;
        c.m00 = m0_i - c.m01;
        c.m10 = m0_j - c.m00;
        c.m1_pre = m1_i;
        c.m0_pre = m0_i;
        c.m1_post = m1_j;
        c.m0_post = m0_j;
        c.total = m_total;
        const ExtendedReal w = weight_fn(c, est);
        wf[j] = w.fin;
        wi[j] = w.inf;
        if constexpr (has_term) {
          const ExtendedReal t = bias_term_fn(c, est);
          pf[j] += t.fin;
          pi[j] += t.inf;
        }
      }
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    for (int chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  }

  if constexpr (has_term) {
    for (int chunk = 0; chunk < n_chunks; ++chunk) {
      const double* pf = part_fin.data() + static_cast<std::size_t>(chunk) * n_out;
      const std::int64_t* pi = part_inf.data() + static_cast<std::size_t>(chunk) * n_out;
      for (int j = 0; j < n_out; ++j) {
        model.bias_fin[j] += pf[j];
        model.bias_inf[j] += static_cast<std::int32_t>(pi[j]);
      }
    }
  }
}

template <typename Source>
WeightModel build_impl(Rule rule, const CounterStore& base, const Source& src,
                       const NoiseEstimate& est, std::optional<double> eta, Exec exec) {
  const int n_in = base.n_in();
  const int n_out = base.n_out();
  const double m_total = static_cast<double>(base.pattern_count());

  WeightModel model;
  model.rule = rule;
  model.n_in = n_in;
  model.n_out = n_out;
  model.estimate = est;
  model.eta = eta;
  model.w_fin.assign(static_cast<std::size_t>(n_in) * n_out, 0.0);
  model.w_inf.assign(static_cast<std::size_t>(n_in) * n_out, 0);
  model.bias_fin.assign(n_out, 0.0);
  model.bias_inf.assign(n_out, 0);

  // Bias prefactors, one per output unit.
  for (int j = 0; j < n_out; ++j) {
    const double m1_j = static_cast<double>(base.unit_usage_out(j));
    const double m0_j = m_total - m1_j;
    ExtendedReal b{0.0, 0};
    switch (rule) {
      case Rule::bayes:
        b = log_ratio(m0_j, m1_j).times(n_in - 1);
        break;
      case Rule::bcpnn:
        b = ExtendedReal{std::numbers::ln2, 0} + log_ratio(m1_j, m_total);
        break;
      case Rule::bcpnn2:
        b = ExtendedReal{std::numbers::ln2, 0} + log_ratio(m_total, m1_j).times(n_in - 1);
        break;
      case Rule::bcpnn3:
        b = log_ratio(m1_j, m0_j);
        break;
    }
    model.bias_fin[j] = b.fin;
    model.bias_inf[j] = b.inf;
  }

  switch (rule) {
    case Rule::bayes:
      fill_rows(base, src, est, exec,
                [](const SynapseCounters& c, const NoiseEstimate& e) { return bayes_weight(c, e); },
                [](const SynapseCounters& c, const NoiseEstimate& e) {
                  return bayes_bias_term(c, e);
                },
                model);
      break;
    case Rule::bcpnn:
      fill_rows(base, src, est, exec,
                [](const SynapseCounters& c, const NoiseEstimate& e) { return bcpnn_weight(c, e); },
                nullptr, model);
      break;
    case Rule::bcpnn2:
      fill_rows(base, src, est, exec,
                [](const SynapseCounters& c, const NoiseEstimate& e) {
                  return bcpnn2_weight(c, e);
                },
                [](const SynapseCounters& c, const NoiseEstimate& e) {
                  return bcpnn2_bias_term(c, e);
                },
                model);
      break;
    case Rule::bcpnn3:
      fill_rows(base, src, est, exec,
                [](const SynapseCounters& c, const NoiseEstimate& e) {
                  return bcpnn3_weight(c, e);
                },
                nullptr, model);
      break;
  }

  model.weights_have_inf =
      std::any_of(model.w_inf.begin(), model.w_inf.end(), [](std::int32_t v) { return v != 0; });
  if (!model.weights_have_inf) {
    model.w_inf.clear();
    model.w_inf.shrink_to_fit();
  }
  model.bias_has_inf = std::any_of(model.bias_inf.begin(), model.bias_inf.end(),
                                   [](std::int32_t v) { return v != 0; });
  return model;
}

}  // namespace

WeightModel build_model(Rule rule, const CounterStore& store, const NoiseEstimate& est,
                        Exec exec) {
  return build_impl(rule, store, PlainSource{store}, est, std::nullopt, exec);
}

WeightModel build_model(Rule rule, const StabilizedCounters& store, const NoiseEstimate& est,
                        Exec exec) {
  return build_impl(rule, store.base(), StabilizedSource{store}, est, store.eta(), exec);
}

DaleShifted dale_shift(const WeightModel& model) {
  if (model.weights_have_inf)
    throw UnsupportedModelError("dale_shift: model has infinite weights");
  DaleShifted out{model, 0.0};
  if (model.w_fin.empty()) return out;
  const double c = -*std::min_element(model.w_fin.begin(), model.w_fin.end());
  for (double& w : out.model.w_fin) w += c;
  out.shift = c;
  return out;
}

WeightModel dirty_materialize(const WeightModel& model, double z_inf) {
  if (!(z_inf > 0.0)) throw std::invalid_argument("dirty_materialize: z_inf must be positive");
  WeightModel out = model;
  if (out.weights_have_inf) {
    for (std::size_t idx = 0; idx < out.w_fin.size(); ++idx)
      out.w_fin[idx] += static_cast<double>(out.w_inf[idx]) * z_inf;
    out.w_inf.clear();
    out.w_inf.shrink_to_fit();
    out.weights_have_inf = false;
  }
  for (std::size_t j = 0; j < out.bias_fin.size(); ++j) {
    out.bias_fin[j] += static_cast<double>(out.bias_inf[j]) * z_inf;
    out.bias_inf[j] = 0;
  }
  out.bias_has_inf = false;
  return out;
}

}  // namespace bam
