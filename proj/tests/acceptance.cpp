// Acceptance suite: runs every exit criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Returns the number of failures.
//
// Usage: acceptance [--cli PATH] [--only N]
//   --cli PATH   path to the rbinit CLI binary (for the end-to-end criteria)
//   --only N     run a single criterion

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rbinit/initializer.hpp"
#include "rbinit/io/scenario_io.hpp"
#include "rbinit/pose.hpp"
#include "rbinit/sim/harness.hpp"
#include "test_support.hpp"

using namespace rbinit;
using namespace rbinit::sim;

namespace {

constexpr double kPi = std::numbers::pi;

struct Criterion {
  int id;
  std::string summary;
  std::function<bool(std::string&)> run;
};

std::string g_cli_path;

double final_rmse(const std::vector<RmseRow>& rows, double granularity_deg) {
  double value = -1.0;
  int last_index = -1;
  for (const RmseRow& r : rows) {
    if (r.granularity_deg == granularity_deg && r.ranging_index > last_index) {
      last_index = r.ranging_index;
      value = r.rmse_m;
    }
  }
  return value;
}

// Criteria 1-3 share one sweep; cache it together with its wall time.
struct SweepResult {
  std::vector<RmseRow> rows;
  double seconds = 0.0;
};

const SweepResult& shared_sweep() {
  static const SweepResult result = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario sc = build_default_scenario();
    FilterSetup setup;
    setup.base = default_base_hypotheses();
    SweepResult r;
    r.rows = rmse_sweep(sc, setup, {90.0, 45.0, 22.5, 11.25}, 100, 20260808);
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return result;
}

bool criterion1(std::string& detail) {
  const double rmse90 = final_rmse(shared_sweep().rows, 90.0);
  std::ostringstream os;
  os << "90 deg final RMSE " << rmse90 << " m (band [4, 10]); full sweep took "
     << shared_sweep().seconds << " s";
  detail = os.str();
  return rmse90 >= 4.0 && rmse90 <= 10.0 && shared_sweep().seconds < 120.0;
}

bool criterion2(std::string& detail) {
  const double rmse90 = final_rmse(shared_sweep().rows, 90.0);
  const double rmse45 = final_rmse(shared_sweep().rows, 45.0);
  const double rmse225 = final_rmse(shared_sweep().rows, 22.5);
  std::ostringstream os;
  os << "final RMSE 45 deg " << rmse45 << " m, 22.5 deg " << rmse225
     << " m, 90 deg " << rmse90 << " m";
  detail = os.str();
  const double lo = std::min(rmse45, rmse225);
  return std::abs(rmse45 - rmse225) <= 0.30 * lo && rmse45 < rmse90 &&
         rmse225 < rmse90;
}

bool criterion3(std::string& detail) {
  const double rmse576 = final_rmse(shared_sweep().rows, 45.0);
  const double rmse9216 = final_rmse(shared_sweep().rows, 11.25);
  std::ostringstream os;
  os << "576 particles " << rmse576 << " m vs 9216 particles " << rmse9216
     << " m (allowed 1.5x)";
  detail = os.str();
  return rmse576 <= 1.5 * rmse9216;
}

// Runs cmd_oracle_compare end to end on the noise-free scenario (exact dead
// reckoning and exact ranges, so both filters target the same posterior) and
// reads the comparison CSV back.
bool criterion4(std::string& detail) {
  if (g_cli_path.empty()) {
    detail = "no --cli path given";
    return false;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "rbinit_acceptance_c4";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  Scenario sc = build_default_scenario();
  sc.range_noise_scale = 0.0;
  rbinit::io::save_scenario(sc, (dir / "noise_free.json").string());
  {
    std::ofstream cfg(dir / "config.json");
    cfg << "{\"scenario\": \"" << (dir / "noise_free.json").string() << "\"}\n";
  }
  const std::string cmd = g_cli_path + " oracle-compare --config " +
                          (dir / "config.json").string() +
                          " --seed 424242 --realizations 50 --out " +
                          dir.string() + " > /dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) {
    detail = "CLI oracle-compare failed";
    return false;
  }

  std::ifstream csv(dir / "oracle_compare.csv");
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  double rmse_init = -1, rmse_oracle = -1, diff = 1e9, ratio = 0;
  {
    std::istringstream cells(row);
    std::string cell;
    int col = 0;
    while (std::getline(cells, cell, ',')) {
      if (col == 2) rmse_init = std::atof(cell.c_str());
      if (col == 3) rmse_oracle = std::atof(cell.c_str());
      if (col == 4) diff = std::atof(cell.c_str());
      if (col == 7) ratio = std::atof(cell.c_str());
      ++col;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::filesystem::remove_all(dir);
  std::ostringstream os;
  os << "final RMSE init " << rmse_init << " m, oracle " << rmse_oracle
     << " m, |diff| " << diff << " m (< 0.5), trig ratio " << ratio << ", "
     << secs << " s";
  detail = os.str();
  return diff < 0.5 && ratio > 10.0 && secs < 300.0;
}

bool criterion5(std::string& detail) {
  const Scenario sc = build_default_scenario();
  FilterSetup setup;
  setup.base = default_base_hypotheses(11.25);
  const CauchyLikelihood lik(setup.likelihood_sigma);
  const SynthesizedRun run = synthesize(sc, synth_stream_seed(31337));
  Rng rng(filter_stream_seed(31337));
  RngGaussianSource gauss(rng);

  InitializerState state;
  DeadReckoningTrack pre;
  bool seeded = false;
  std::size_t next_inc = 0;
  std::uint64_t update_trig = 0;
  std::uint64_t seed_trig = 0;
  std::uint64_t resample_trig = 0;
  std::uint64_t resampled = 0;

  for (const SynthRangeEvent& ev : run.measurements) {
    while (next_inc < ev.after_step) {
      if (seeded) {
        apply_increment(state, run.increments[next_inc].u);
      } else {
        pre = propagate(pre, run.increments[next_inc].u);
      }
      ++next_inc;
    }
    if (!seeded) {
      state = seed(ev.meas, pre, setup.base, lik);
      seeded = true;
      seed_trig = state.counters.trig;
      continue;
    }
    const std::uint64_t before_update = state.counters.trig;
    ranging_update(state, ev.meas, lik);
    const auto [x, p] = current_estimate(state);
    (void)x;
    (void)p;
    update_trig += state.counters.trig - before_update;

    const std::uint64_t before_resample = state.counters.trig;
    const int replaced = resample(state, gauss, setup.config);
    resample_trig += state.counters.trig - before_resample;
    resampled += std::uint64_t(replaced);
  }

  std::ostringstream os;
  os << "trig in updates " << update_trig << " (must be 0); seed "
     << seed_trig << " = 2*(32+32); resample " << resample_trig << " = 2*"
     << resampled << " replaced";
  detail = os.str();
  return update_trig == 0 && seed_trig == 2 * (32 + 32) &&
         resample_trig == 2 * resampled && resampled > 0;
}

bool criterion6(std::string& detail) {
  const Scenario sc = build_default_scenario();
  FilterSetup setup;
  setup.base = default_base_hypotheses(11.25);
  const CauchyLikelihood lik(setup.likelihood_sigma);
  const SynthesizedRun run = synthesize(sc, synth_stream_seed(64));

  DeadReckoningTrack pre;
  std::size_t next_inc = 0;
  while (next_inc < run.measurements[0].after_step) {
    pre = propagate(pre, run.increments[next_inc++].u);
  }
  InitializerState state = seed(run.measurements[0].meas, pre, setup.base, lik);
  while (next_inc < run.measurements[1].after_step) {
    apply_increment(state, run.increments[next_inc++].u);
  }

  const OpCounters before = state.counters;
  ranging_update(state, run.measurements[1].meas, lik);
  const OpCounters delta = state.counters - before;
  const double n = double(state.n());
  const double add_pp = double(delta.add) / n;
  const double mul_pp = double(delta.mul) / n;
  const double div_pp = double(delta.div) / n;
  const double sqrt_pp = double(delta.sqrt) / n;
  const double mod_pp = double(delta.mod) / n;

  std::ostringstream os;
  os << "per particle: add " << add_pp << " (<= 64), mul " << mul_pp
     << " (<= 64), div " << div_pp << " (<= 2), sqrt " << sqrt_pp << ", mod "
     << mod_pp;
  detail = os.str();
  return add_pp <= 64.0 && mul_pp <= 64.0 && div_pp <= 2.0 && sqrt_pp <= 2.0 &&
         mod_pp <= 2.0 && delta.trig == 0;
}

bool criterion7(std::string& detail) {
  Rng rng(7777);
  const CauchyLikelihood lik(1.0);
  int cases = 0;

  // Weight normalization and PSD moments through real updates.
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + int(rng.uniform(0.0, 60.0));
    std::vector<Particle> ps;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      Particle p;
      p.p0 = {rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-2, 2)};
      p.theta0 = rng.uniform(-kPi, kPi);
      p.cos_theta0 = std::cos(p.theta0);
      p.sin_theta0 = std::sin(p.theta0);
      p.weight = rng.uniform(0.001, 1.0);
      total += p.weight;
      ps.push_back(p);
    }
    for (Particle& p : ps) p.weight /= total;
    InitializerState s;
    s.particles = std::move(ps);
    s.zero_track.mean = test::random_state(rng);
    const RangeMeasurement meas{rng.uniform(0.0, 60.0),
                                {rng.uniform(-40, 40), rng.uniform(-40, 40), 0.0}};
    if (ranging_update(s, meas, lik) != UpdateOutcome::kApplied) return false;
    double sum = 0.0;
    for (const Particle& p : s.particles) sum += p.weight;
    if (std::abs(sum - 1.0) > 1e-12) {
      detail = "weight normalization violated";
      return false;
    }
    if (test::min_eigenvalue(s.p0_hat) < -1e-10 * std::max(1.0, s.p0_hat.trace())) {
      detail = "P0 not PSD";
      return false;
    }
    ++cases;
  }

  // Frame-transform round trip.
  for (int trial = 0; trial < 1000; ++trial) {
    const StateVector x = test::random_state(rng);
    const StateVector origin = test::random_state(rng);
    const StateVector rt = from_zero_frame(to_zero_frame(x, origin), origin);
    if ((rt.head<3>() - x.head<3>()).cwiseAbs().maxCoeff() > 1e-12 ||
        std::abs(wrap_diff(rt[kTheta], x[kTheta])) > 1e-12) {
      detail = "frame round trip violated";
      return false;
    }
    ++cases;
  }

  // wrap_diff range and congruence.
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = rng.uniform(-10.0 * kPi, 10.0 * kPi);
    const double b = rng.uniform(-10.0 * kPi, 10.0 * kPi);
    const double d = wrap_diff(a, b);
    if (!(d > -kPi && d <= kPi) ||
        std::abs(std::remainder(d - (a - b), 2.0 * kPi)) > 1e-9) {
      detail = "wrap_diff range/congruence violated";
      return false;
    }
    ++cases;
  }

  // Resample inflation at N = 10^4 across random covariances and alphas.
  // The heading variance is scaled down so the wrap cannot distort the
  // sample covariance of the draws.
  InitializerConfig cfg;
  const std::size_t n_big = 10000;
  for (int trial = 0; trial < 1000; ++trial) {
    Covariance4 p0 = test::random_psd(rng, 0.1);
    const double theta_scale = 0.1 / std::sqrt(p0(3, 3));
    p0.row(3) *= theta_scale;
    p0.col(3) *= theta_scale;
    cfg.alpha = rng.uniform(1.0, 2.0);

    InitializerState s;
    s.particles.assign(n_big, Particle{});
    s.x0_hat = test::random_state(rng, 3.0);
    s.p0_hat = p0;
    Rng draw_rng(derive_seed(7777, 1, std::uint64_t(trial)));
    RngGaussianSource gauss(draw_rng);
    resample(s, gauss, cfg);

    StateVector mean = StateVector::Zero();
    for (const Particle& p : s.particles) {
      mean.head<3>() += p.p0;
      mean[kTheta] += wrap_diff(p.theta0, s.x0_hat[kTheta]);
    }
    mean /= double(n_big);
    mean[kTheta] += s.x0_hat[kTheta];
    Covariance4 sample = Covariance4::Zero();
    for (const Particle& p : s.particles) {
      StateVector d;
      d.head<3>() = p.p0 - mean.head<3>();
      d[kTheta] = wrap_diff(p.theta0, mean[kTheta]);
      sample += d * d.transpose() / double(n_big);
    }
    const Covariance4 expected = cfg.alpha * cfg.alpha * p0;
    if ((sample - expected).norm() / expected.norm() > 0.10) {
      std::ostringstream os;
      os << "resample inflation off by "
         << (sample - expected).norm() / expected.norm() << " at trial " << trial;
      detail = os.str();
      return false;
    }
    ++cases;
  }

  std::ostringstream os;
  os << cases << " randomized cases across 5 invariant families";
  detail = os.str();
  return true;
}

bool criterion8(std::string& detail) {
  const Scenario sc = make_static_agent_variant(build_default_scenario());
  FilterSetup setup;
  setup.base = default_base_hypotheses(11.25);
  const RealizationResult r = run_realization(sc, setup, 20260808);
  std::ostringstream os;
  os << "static agent over " << r.errors.size()
     << " rangings, termination index " << r.termination_index
     << " (must stay -1)";
  detail = os.str();
  return r.termination_index == -1 && r.errors.size() == 8;
}

bool run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

bool files_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

bool criterion9(std::string& detail) {
  if (g_cli_path.empty()) {
    detail = "no --cli path given";
    return false;
  }
  const std::filesystem::path base =
      std::filesystem::temp_directory_path() / "rbinit_acceptance_c9";
  std::filesystem::remove_all(base);
  const std::filesystem::path run1 = base / "run1";
  const std::filesystem::path run2 = base / "run2";

  if (!run_cli("simulate --seed 42 --out " + run1.string()) ||
      !run_cli("simulate --seed 42 --out " + run2.string())) {
    detail = "CLI simulate failed";
    return false;
  }
  bool ok = true;
  std::ostringstream os;
  for (const char* name : {"trace.csv", "snapshots.jsonl", "events.jsonl"}) {
    const bool same = files_identical(run1 / name, run2 / name);
    ok = ok && same;
    os << name << (same ? " identical; " : " DIFFERS; ");
  }
  detail = os.str();
  std::filesystem::remove_all(base);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = -1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "paper-number reproduction: 90 deg final RMSE in [4, 10] m", criterion1},
      {2, "granularity insensitivity at and below 45 deg", criterion2},
      {3, "particle-count economy: 576 within 1.5x of 9216", criterion3},
      {4, "oracle equivalence within 0.5 m final RMSE", criterion4},
      {5, "trig-free ranging updates (exact counter)", criterion5},
      {6, "per-particle cost within 2x of the operation budget", criterion6},
      {7, "invariant suite, 1000 randomized cases per family", criterion7},
      {8, "static agent never terminates", criterion8},
      {9, "byte-identical outputs for identical seeds", criterion9},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only > 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": "
              << c.summary;
    if (!detail.empty()) std::cout << " -- " << detail;
    std::cout << std::endl;
    if (!ok) ++failures;
  }
  return failures;
}
