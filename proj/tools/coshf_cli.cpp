// Command-line driver: one optimization run or a parameter sweep, results
// exported under --out.
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coshf/bench_td.hpp"
#include "coshf/report.hpp"
#include "coshf/sca.hpp"

using namespace uavsec;

namespace {

enum Exit { kOk = 0, kUsage = 1, kMaxIter = 2, kInfeasible = 3 };

struct Options {
  std::string scenario_file;
  long long seed = -1;
  int random_k = 4;
  std::string mode = "coshf";
  int td_n0 = 40;
  double eps = 1e-3;
  int max_iter = 100;
  int quad_order = 8;
  int N = -1;
  std::size_t audit_samples = kDefaultAuditSamples;
  std::string sweep;
  std::string out;
};

struct Outcome {
  RunBundle bundle;
  int exit_code = kOk;
};

int exit_for(const SolveReport& r, bool feasible) {
  if (r.status == RunStatus::Infeasible || !feasible) return kInfeasible;
  if (r.status == RunStatus::MaxIter) return kMaxIter;
  return kOk;
}

Outcome run_once(const Scenario& sc, const Options& o, int td_n0) {
  Outcome out;
  RunBundle& b = out.bundle;
  b.mode = o.mode;
  b.scenario = sc;
  b.config = {{"mode", o.mode},
              {"eps", format_double(o.eps)},
              {"max_iter", std::to_string(o.max_iter)},
              {"quad_order", std::to_string(o.quad_order)},
              {"audit_samples", std::to_string(o.audit_samples)}};
  if (o.mode == "td") {
    b.config.emplace_back("td_n0", std::to_string(td_n0));
    TdConfig cfg;
    cfg.N0 = td_n0;
    cfg.eps = o.eps;
    cfg.max_outer = o.max_iter;
    cfg.quad_order = o.quad_order;
    cfg.audit_samples = o.audit_samples;
    TdResult r = run_td(sc, cfg);
    b.report = r.report;
    b.td_relaxed = r.relaxed;
    b.td_path = r.path;
    out.exit_code = exit_for(r.report, r.report.audit.feasible(sc, true));
  } else {
    b.config.emplace_back("N", std::to_string(o.N >= 0 ? o.N : sc.N));
    ScaConfig cfg;
    cfg.eps = o.eps;
    cfg.max_outer = o.max_iter;
    cfg.quad_order = o.quad_order;
    cfg.N = o.N;
    cfg.audit_samples = o.audit_samples;
    ScaResult r = o.mode == "single" ? run_single_uav(sc, cfg) : run(sc, cfg);
    b.report = r.report;
    b.relaxed = r.relaxed;
    b.solution = r.solution;
    if (o.mode == "single") b.scenario.P_J = 0.0;
    out.exit_code = exit_for(r.report, r.report.audit.feasible(b.scenario, true));
  }
  return out;
}

void summarize(const RunBundle& b, const std::string& dir) {
  const SolveReport& r = b.report;
  std::printf("%s: %s after %d+%d iterations, min throughput %s bits/Hz, wallclock %s s -> %s\n", b.mode.c_str(),
              to_string(r.status), r.iters, r.polish_iters, format_double(r.objective).c_str(),
              format_double(r.wallclock_main + r.wallclock_polish).c_str(), dir.c_str());
  for (const auto& v : r.audit.violations(b.scenario, true)) std::printf("  audit: %s\n", v.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-UAV jamming-aided secure communication: hover-and-fly trajectory optimization"};
  Options o;
  auto* opt_file = app.add_option("--scenario", o.scenario_file, "Scenario file (key = value lines)")->check(CLI::ExistingFile);
  auto* opt_seed = app.add_option("--seed", o.seed, "Random scenario seed (default scenario when neither is given)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--random-k", o.random_k, "Users in a random scenario")->check(CLI::Range(1, 12));
  app.add_option("--mode", o.mode, "coshf, td or single")->check(CLI::IsMember({"coshf", "td", "single"}));
  app.add_option("--td-n0", o.td_n0, "Time slots for --mode td")->check(CLI::Range(2, 100000));
  app.add_option("--eps", o.eps, "Stop when the objective changes by less (bits/Hz)")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", o.max_iter, "Outer iteration cap")->check(CLI::Range(1, 100000));
  app.add_option("--quad-order", o.quad_order, "Gauss-Legendre nodes per flight segment")->check(CLI::Range(1, 64));
  app.add_option("--N", o.N, "Turning points per leg (default from the scenario)")->check(CLI::Range(0, 64));
  app.add_option("--audit-samples", o.audit_samples, "Uniform audit samples")->check(CLI::Range(1, 100000000));
  app.add_option("--sweep", o.sweep, "pj, n0 or speed")->check(CLI::IsMember({"pj", "n0", "speed"}));
  app.add_option("--out", o.out, "Output directory (default $COSHF_OUT_DIR or ./out)");
  opt_file->excludes(opt_seed);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (o.out.empty()) o.out = default_out_dir();

  Scenario sc;
  try {
    if (!o.scenario_file.empty())
      sc = load_scenario(o.scenario_file);
    else if (o.seed >= 0)
      sc = random_scenario(static_cast<std::uint64_t>(o.seed), o.random_k);
    else
      sc = default_scenario();
  } catch (const std::exception& e) {
    std::cerr << "scenario: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (o.sweep.empty()) {
      Outcome res = run_once(sc, o, o.td_n0);
      export_bundle(res.bundle, o.out);
      summarize(res.bundle, o.out);
      return res.exit_code;
    }

    // Sweep: independent runs in parallel, rows in grid order.
    std::vector<double> grid;
    std::string param;
    if (o.sweep == "pj") {
      param = "P_J";
      grid = {dbm_to_watts(-10.0), dbm_to_watts(0.0), dbm_to_watts(10.0), dbm_to_watts(20.0)};
    } else if (o.sweep == "n0") {
      param = "N0";
      grid = {10, 20, 40};
      o.mode = "td";
    } else {
      param = "V";
      grid = {5, 10, 15, 20};
    }
    std::vector<std::future<Outcome>> jobs;
    for (double v : grid) {
      Scenario s = sc;
      int n0 = o.td_n0;
      if (param == "P_J") s.P_J = v;
      if (param == "V") s.V = v;
      if (param == "N0") n0 = static_cast<int>(v);
      jobs.push_back(std::async(std::launch::async, [s, o, n0] { return run_once(s, o, n0); }));
    }
    std::vector<SweepRow> rows;
    int worst = kOk;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      Outcome res = jobs[i].get();
      const std::string dir = (std::filesystem::path(o.out) / (o.sweep + "_" + std::to_string(i))).string();
      export_bundle(res.bundle, dir);
      summarize(res.bundle, dir);
      const SolveReport& r = res.bundle.report;
      rows.push_back({param, grid[i], o.seed >= 0 ? static_cast<std::uint64_t>(o.seed) : 0, o.mode,
                      to_string(r.status), r.iters, r.objective, r.wallclock_main + r.wallclock_polish});
      worst = std::max(worst, res.exit_code);
    }
    write_text((std::filesystem::path(o.out) / ("sweep_" + o.sweep + ".csv")).string(), sweep_csv(rows));
    return worst;
  } catch (const ScenarioError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
