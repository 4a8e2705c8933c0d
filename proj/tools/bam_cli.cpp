// Command-line harness: sweep experiments to CSV, interpolate capacities,
// print ANE calibration tables and dump weight matrices.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bam/harness.hpp"
#include "bam/rng.hpp"

namespace {

using nlohmann::json;

// --set key=value overrides applied to the parsed config JSON; nested keys
// use dots (schedule.alpha=0.9). Values parse as JSON when possible and
// fall back to strings.
json apply_overrides(json obj, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got: " + s);
    const std::string path = s.substr(0, eq);
    const std::string value = s.substr(eq + 1);
    json* node = &obj;
    std::size_t start = 0;
    for (;;) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (key.empty()) throw std::invalid_argument("--set has an empty key in: " + s);
      if (dot == std::string::npos) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
  return obj;
}

bam::ExperimentConfig load_config(const std::string& path,
                                  const std::vector<std::string>& sets) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  json obj = json::parse(text.str());
  return bam::ExperimentConfig::from_json(apply_overrides(std::move(obj), sets).dump());
}

void print_calibration(const bam::CalibrationResult& result, std::ostream& out) {
  out << "step,lambda_est,kappa_est,eps,p_corr,f10_mean,f01_mean,lambda_out,kappa_out\n";
  char buf[256];
  for (std::size_t t = 0; t < result.steps.size(); ++t) {
    const auto& s = result.steps[t];
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", t + 1,
                  s.lambda_est, s.kappa_est, s.eps, s.p_corr, s.f10_mean, s.f01_mean,
                  s.lambda_out, s.kappa_out);
    out << buf;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary associative memory experiment harness"};
  app.require_subcommand(1);

  std::string config_path, output, criterion = "pcorr:0.9", csv_path;
  std::vector<std::string> sets;
  bool serial = false;
  int dump_m = 0, dump_network = 0;

  auto add_common = [&](CLI::App* cmd, bool with_config) {
    if (with_config)
      cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--set", sets, "override a config field, e.g. --set schedule.alpha=0.9");
    cmd->add_flag("--serial", serial, "run the serial reference kernels");
  };

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run the config's sweep and write its CSV");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--output", output, "output CSV path (overrides config)");

  CLI::App* capacity_cmd =
      app.add_subcommand("capacity", "interpolate pattern capacities from a sweep CSV");
  capacity_cmd->add_option("csv", csv_path, "sweep CSV")->required();
  capacity_cmd->add_option("--criterion", criterion, "eps:0.01 or pcorr:0.9");
  capacity_cmd->add_option("--output", output, "write the report here instead of stdout");

  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate-ane", "print the per-step ANE calibration table");
  add_common(calibrate_cmd, true);
  calibrate_cmd->add_option("--output", output, "write the table here instead of stdout");

  CLI::App* dump_cmd = app.add_subcommand("dump-weights", "dump one cell's weight matrix");
  add_common(dump_cmd, true);
  dump_cmd->add_option("--m", dump_m, "pattern count (default: first grid entry)");
  dump_cmd->add_option("--network", dump_network, "network index (default 0)");
  dump_cmd->add_option("--output", output, "write the CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  const bam::Exec exec = serial ? bam::Exec::serial : bam::Exec::parallel;

  try {
    if (sweep_cmd->parsed()) {
      bam::ExperimentConfig cfg = load_config(config_path, sets);
      if (!output.empty()) cfg.output = output;
      bam::sweep(cfg, exec);
      std::cout << "wrote " << cfg.output << "\n";
      return 0;
    }

    auto write_out = [&](const std::string& text) {
      if (output.empty()) {
        std::cout << text;
        return;
      }
      std::ofstream f(output, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open output " + output);
      f << text;
    };

    if (capacity_cmd->parsed()) {
      std::ifstream in(csv_path);
      if (!in) throw std::runtime_error("cannot open " + csv_path);
      const bam::CsvTable table = bam::read_csv(in);
      write_out(bam::capacity_report_csv(table, bam::CapacityCriterion::parse(criterion)));
      return 0;
    }

    if (calibrate_cmd->parsed()) {
      const bam::ExperimentConfig cfg = load_config(config_path, sets);
      std::ostringstream text;
      for (bam::Rule rule : cfg.rules) {
        text << "# rule " << bam::to_string(rule) << "\n";
        print_calibration(bam::run_calibration(cfg, rule, exec), text);
      }
      write_out(text.str());
      return 0;
    }

    if (dump_cmd->parsed()) {
      const bam::ExperimentConfig cfg = load_config(config_path, sets);
      const int m = dump_m > 0 ? dump_m : cfg.m_grid.front();
      const bam::PatternSet addr = bam::gen_patterns(
          cfg.n, cfg.k, m, cfg.family,
          bam::derive_stream(cfg.seed, bam::StreamKind::pattern_set,
                             static_cast<std::uint64_t>(m),
                             static_cast<std::uint64_t>(dump_network)));
      const bam::CounterStore counters = bam::store(addr, bam::Mode::auto_assoc);
      bam::ModelCache cache(counters, cfg.rules.front(), cfg.k, cfg.eta, exec);
      const bam::WeightModel& model =
          cache.get(cfg.step1_lambda_est(), cfg.step1_kappa_est());
      std::ostringstream text;
      bam::dump_weights(model, text);
      write_out(text.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
