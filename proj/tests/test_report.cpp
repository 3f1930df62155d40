#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "coshf/report.hpp"
#include "coshf/sca.hpp"

using namespace uavsec;
namespace fs = std::filesystem;

TEST_CASE("number text round trip") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 20 - 10);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK(parse_double(format_double(-INFINITY)) == -INFINITY);
  CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("scenario hash") {
  CHECK(scenario_hash(default_scenario()).size() == 16);
  CHECK(scenario_hash(default_scenario()) == scenario_hash(random_scenario(1, 4)));
  CHECK(scenario_hash(default_scenario()) != scenario_hash(random_scenario(2, 4)));
}

TEST_CASE("CSV round trips") {
  const Scenario sc = default_scenario();
  const CoShfTrajectory t = round_schedule(initialize(sc, 1));
  const DiscretePath p = to_discrete(t, sc, 1.0);
  const std::string csv = trajectory_csv(p);
  CHECK(csv.rfind("t,xS,yS,xJ,yJ,active_user\n", 0) == 0);
  const DiscretePath back = parse_trajectory_csv(csv, sc.K);
  CHECK(back.t == p.t);
  CHECK(back.pos_S == p.pos_S);
  CHECK(trajectory_csv(back) == csv);

  const auto rows = schedule_rows(t, sc);
  CHECK(static_cast<int>(rows.size()) == sc.K + t.num_segments());
  const std::string s = schedule_csv(rows, sc.K);
  CHECK(parse_schedule_csv(s) == rows);
  CHECK(schedule_csv(parse_schedule_csv(s), sc.K) == s);
  double end = 0;
  for (const auto& r : rows) {
    CHECK(r.t_start == doctest::Approx(end));
    end = r.t_start + r.duration;
  }
  CHECK(end == doctest::Approx(total_time(t, sc)));
}

TEST_CASE("sweep CSV") {
  CHECK(sweep_csv({}) == "param,value,seed,mode,status,iters,objective,wallclock\n");
  CHECK(parse_sweep_csv(sweep_csv({})).empty());
  std::vector<SweepRow> rows;
  for (double pj : {-10.0, 0.0, 10.0, 20.0})
    rows.push_back({"P_J", pj, 1, "coshf", "converged", 12, 100.0 + pj, 1.25});
  const std::string s = sweep_csv(rows);
  CHECK(parse_sweep_csv(s) == rows);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}

TEST_CASE("results JSON and bundle export") {
  const Scenario sc = random_scenario(2, 2);
  ScaConfig cfg;
  cfg.max_outer = 3;
  const ScaResult r = run(sc, cfg);
  RunBundle b;
  b.mode = "coshf";
  b.scenario = sc;
  b.config = {{"eps", "0.001"}};
  b.report = r.report;
  b.relaxed = r.relaxed;
  b.solution = r.solution;

  const std::string j = results_json(b);
  const SolveReport back = report_from_results_json(j);
  CHECK(back.objective_trace == r.report.objective_trace);
  CHECK(back.throughput == r.report.throughput);
  CHECK(back.iters == r.report.iters);
  CHECK(back.status == r.report.status);
  CHECK(j.find(scenario_hash(sc)) != std::string::npos);

  // Timings are the only run-to-run difference.
  const ScaResult r2 = run(sc, cfg);
  RunBundle b2 = b;
  b2.report = r2.report;
  b2.relaxed = r2.relaxed;
  b2.solution = r2.solution;
  CHECK(results_json(b, false) == results_json(b2, false));
  CHECK(results_json(b, false).find("wallclock") == std::string::npos);

  const fs::path dir = fs::temp_directory_path() / "coshf_test_report";
  fs::remove_all(dir);
  export_bundle(b, dir.string());
  for (const char* f : {"results.json", "trajectory.csv", "schedule.csv", "solution.json", "relaxed.json"})
    CHECK(fs::exists(dir / f));
  CHECK(trajectory_from_json(read_text((dir / "solution.json").string())) == r.solution);
  CHECK(read_text((dir / "results.json").string()) == j);
  fs::remove_all(dir);
}

TEST_CASE("output directory from the environment") {
  ::setenv("COSHF_OUT_DIR", "/tmp/somewhere", 1);
  CHECK(default_out_dir() == "/tmp/somewhere");
  ::setenv("COSHF_OUT_DIR", "", 1);
  CHECK(default_out_dir() == "out");
  ::unsetenv("COSHF_OUT_DIR");
  CHECK(default_out_dir() == "out");
}
