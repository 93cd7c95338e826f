// Command-line front end for the range-and-dead-reckoning initializer:
// scenario simulation, RMSE sweeps, measurement-log replay, and the
// brute-force oracle comparison.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rbinit/io/event_log.hpp"
#include "rbinit/io/run_config.hpp"
#include "rbinit/io/scenario_io.hpp"
#include "rbinit/sim/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct CliOverrides {
  std::string config_path;
  std::string dump_config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<std::string> out_dir;
  std::vector<double> granularity_deg;
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::optional<double> sigma;
  std::vector<double> gamma_cov;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--dump-config", o.dump_config_path,
                  "write the effective config to this path and continue");
  cmd->add_option("--seed", o.seed, "master random seed");
  cmd->add_option("--realizations", o.realizations, "number of Monte-Carlo realizations");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--granularity-deg", o.granularity_deg,
                  "bearing/heading granularity in degrees (list for rmse-sweep)")
      ->delimiter(',');
  cmd->add_option("--gamma", o.gamma, "resampling threshold factor, in (0,1)");
  cmd->add_option("--alpha", o.alpha, "resampling forgetting factor, >= 1");
  cmd->add_option("--sigma", o.sigma, "likelihood Cauchy scale [m]");
  cmd->add_option("--gamma-cov", o.gamma_cov,
                  "termination bounds [m^2, m^2, m^2, deg^2]")
      ->delimiter(',');
}

rbinit::io::RunConfig build_config(const CliOverrides& o, bool sweep_command) {
  rbinit::io::RunConfig cfg;
  if (!o.config_path.empty()) cfg.load_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.realizations) cfg.realizations = *o.realizations;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.sigma) cfg.sigma = *o.sigma;
  if (!o.gamma_cov.empty()) cfg.gamma_cov = o.gamma_cov;
  if (!o.granularity_deg.empty()) {
    if (sweep_command) {
      cfg.sweep_granularities_deg = o.granularity_deg;
    } else if (o.granularity_deg.size() == 1) {
      cfg.bearing_granularity_deg = o.granularity_deg[0];
      cfg.heading_granularity_deg = o.granularity_deg[0];
    } else {
      throw std::invalid_argument(
          "--granularity-deg takes a single value outside rmse-sweep");
    }
  }
  cfg.validate();
  if (!o.dump_config_path.empty()) cfg.save_file(o.dump_config_path);
  return cfg;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_trace(const std::filesystem::path& path,
                 const rbinit::sim::RealizationResult& result,
                 const std::vector<rbinit::StateVector>* truth) {
  std::ofstream out = open_output(path);
  out << "ranging_index,true_x,true_y,true_z,est_x,est_y,est_z,est_theta_rad,"
         "pos_error_m,terminated\n";
  for (std::size_t j = 0; j < result.estimates.size(); ++j) {
    const rbinit::StateVector& e = result.estimates[j];
    out << j << ",";
    if (truth) {
      const rbinit::StateVector& t = (*truth)[j];
      out << t[0] << "," << t[1] << "," << t[2] << ",";
    } else {
      out << "nan,nan,nan,";
    }
    out << e[0] << "," << e[1] << "," << e[2] << "," << e[3] << ",";
    if (j < result.errors.size()) {
      out << result.errors[j];
    } else {
      out << "nan";
    }
    const bool term = result.termination_index >= 0 &&
                      int(j) >= result.termination_index;
    out << "," << (term ? 1 : 0) << "\n";
  }
}

int cmd_simulate(const rbinit::io::RunConfig& cfg) {
  const rbinit::sim::Scenario sc = cfg.scenario();
  const rbinit::sim::FilterSetup setup = cfg.filter_setup();
  std::filesystem::create_directories(cfg.out_dir);

  const rbinit::sim::SynthesizedRun run =
      rbinit::sim::synthesize(sc, rbinit::sim::synth_stream_seed(cfg.seed));
  const rbinit::sim::RealizationResult result = rbinit::sim::run_initializer_on(
      run, setup, rbinit::sim::filter_stream_seed(cfg.seed));

  const std::filesystem::path out_dir(cfg.out_dir);
  write_trace(out_dir / "trace.csv", result, &run.truth_at_ranging);
  {
    std::ofstream snaps = open_output(out_dir / "snapshots.jsonl");
    rbinit::io::write_snapshots(result.snapshots, snaps);
  }
  rbinit::io::write_event_log(run, (out_dir / "events.jsonl").string());

  std::cout << "simulate: " << result.estimates.size() << " rangings, "
            << setup.base.particle_count() << " particles";
  if (result.termination_index >= 0) {
    std::cout << ", terminated at ranging " << result.termination_index;
  } else {
    std::cout << ", never terminated";
  }
  if (!result.errors.empty()) {
    std::cout << ", final position error " << result.errors.back() << " m";
  }
  std::cout << "\n";
  if (result.warnings > 0) {
    std::cerr << "warning: " << result.warnings
              << " range measurement(s) discarded (weight underflow)\n";
  }
  return kExitOk;
}

int cmd_rmse_sweep(const rbinit::io::RunConfig& cfg) {
  const rbinit::sim::Scenario sc = cfg.scenario();
  const rbinit::sim::FilterSetup setup = cfg.filter_setup();
  std::filesystem::create_directories(cfg.out_dir);

  const std::vector<rbinit::sim::RmseRow> rows = rbinit::sim::rmse_sweep(
      sc, setup, cfg.sweep_granularities_deg, cfg.realizations, cfg.seed);

  std::ofstream out = open_output(std::filesystem::path(cfg.out_dir) / "rmse.csv");
  out << "granularity_deg,n_particles,ranging_index,rmse_m\n";
  for (const rbinit::sim::RmseRow& row : rows) {
    out << row.granularity_deg << "," << row.n_particles << ","
        << row.ranging_index << "," << row.rmse_m << "\n";
  }
  std::cout << "rmse-sweep: " << rows.size() << " rows over "
            << cfg.sweep_granularities_deg.size() << " granularities, "
            << cfg.realizations << " realizations\n";
  return kExitOk;
}

int cmd_replay(const rbinit::io::RunConfig& cfg, const std::string& log_path) {
  const std::vector<rbinit::io::LoggedEvent> events =
      rbinit::io::read_event_log(log_path);
  if (events.empty()) {
    std::cerr << "warning: empty event log, nothing to replay\n";
    return kExitOk;
  }

  rbinit::sim::SynthesizedRun run;
  for (const rbinit::io::LoggedEvent& ev : events) {
    if (ev.is_range) {
      rbinit::sim::SynthRangeEvent m;
      m.t = ev.t;
      m.after_step = run.increments.size();
      m.meas = ev.meas;
      run.measurements.push_back(m);
    } else {
      run.increments.push_back({ev.t, ev.u});
    }
  }

  const rbinit::sim::FilterSetup setup = cfg.filter_setup();
  const rbinit::sim::RealizationResult result = rbinit::sim::run_initializer_on(
      run, setup, rbinit::sim::filter_stream_seed(cfg.seed));

  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path out_dir(cfg.out_dir);
  write_trace(out_dir / "trace.csv", result, nullptr);
  {
    std::ofstream snaps = open_output(out_dir / "snapshots.jsonl");
    rbinit::io::write_snapshots(result.snapshots, snaps);
  }
  std::cout << "replay: " << run.measurements.size() << " rangings, "
            << run.increments.size() << " increments\n";
  return kExitOk;
}

int cmd_oracle_compare(const rbinit::io::RunConfig& cfg) {
  const rbinit::sim::Scenario sc = cfg.scenario();
  const rbinit::sim::FilterSetup setup = cfg.filter_setup();
  std::filesystem::create_directories(cfg.out_dir);

  const rbinit::sim::CompareResult cmp =
      rbinit::sim::oracle_compare(sc, setup, cfg.realizations, cfg.seed);

  const double diff = std::abs(cmp.rmse_init - cmp.rmse_oracle);
  const double ratio = cmp.trig_init > 0
                           ? double(cmp.trig_oracle) / double(cmp.trig_init)
                           : std::numeric_limits<double>::infinity();

  std::ofstream out =
      open_output(std::filesystem::path(cfg.out_dir) / "oracle_compare.csv");
  out << "n_seeds,n_particles,rmse_init_m,rmse_oracle_m,rmse_diff_m,"
         "trig_init,trig_oracle,trig_ratio\n";
  out << cmp.n_seeds << "," << cmp.n_particles << "," << cmp.rmse_init << ","
      << cmp.rmse_oracle << "," << diff << "," << cmp.trig_init << ","
      << cmp.trig_oracle << "," << ratio << "\n";

  std::cout << "oracle-compare: final RMSE init " << cmp.rmse_init
            << " m, oracle " << cmp.rmse_oracle << " m, |diff| " << diff
            << " m, trig ratio " << ratio << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive Bayesian initialization of localization from ranging"
               " and dead reckoning"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string log_path;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run one realization; writes trace.csv, snapshots.jsonl, events.jsonl");
  add_common_options(simulate, o);

  CLI::App* sweep = app.add_subcommand(
      "rmse-sweep", "Monte-Carlo RMSE over a granularity list; writes rmse.csv");
  add_common_options(sweep, o);

  CLI::App* replay = app.add_subcommand(
      "replay", "feed a recorded measurement log through the initializer");
  replay->add_option("log", log_path, "JSON-lines event log")->required();
  add_common_options(replay, o);

  CLI::App* oracle = app.add_subcommand(
      "oracle-compare", "initializer vs. brute-force current-state filter");
  add_common_options(oracle, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    const rbinit::io::RunConfig cfg = build_config(o, sweep->parsed());
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (sweep->parsed()) return cmd_rmse_sweep(cfg);
    if (replay->parsed()) return cmd_replay(cfg, log_path);
    if (oracle->parsed()) return cmd_oracle_compare(cfg);
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}
