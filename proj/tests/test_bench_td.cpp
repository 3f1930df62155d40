#include <doctest.h>

#include "coshf/bench_td.hpp"
#include "coshf/channel.hpp"

using namespace uavsec;

TEST_CASE("initialization") {
  const Scenario sc = default_scenario();
  CHECK_THROWS_AS(td_initialize(sc, 1), ScenarioError);
  Scenario far = sc;
  far.T = 39;  // 400 m chord at 10 m/s
  CHECK_THROWS_AS(td_initialize(far, 20), ScenarioError);
  const DiscretePath p = td_initialize(sc, 20);
  REQUIRE(p.size() == 21);
  CHECK(p.dt == doctest::Approx(sc.T / 20));
  CHECK(p.pos_S.front() == sc.start_S);
  CHECK(p.pos_S.back() == sc.end_S);
  CHECK(p.pos_J.back() == sc.end_J);
  for (std::size_t n = 0; n + 1 < p.size(); ++n) {
    CHECK((p.pos_S[n + 1] - p.pos_S[n]).norm() <= sc.V * p.dt + 1e-9);
    CHECK((p.pos_J[n + 1] - p.pos_J[n]).norm() <= sc.V * p.dt + 1e-9);
  }
}

TEST_CASE("slot-model throughput by hand") {
  Scenario sc = random_scenario(5, 2);
  DiscretePath p;
  p.dt = sc.T / 2;
  p.t = {0, p.dt, sc.T};
  p.pos_S = {Vec2(0, 0), Vec2(100, 0), Vec2(200, 0)};
  p.pos_J = {Vec2(0, 50), Vec2(0, 50), Vec2(0, 50)};
  p.sched = Eigen::MatrixXd::Zero(3, 2);
  p.sched(0, 0) = 1;
  p.sched(1, 1) = 0.25;
  p.sched(1, 0) = 0.75;
  p.sched(2, 0) = 1;
  const auto thr = td_model_throughput(p, sc);
  const double r00 = secrecy_rate(Vec2(50, 0), Vec2(0, 50), 0, sc);
  const double r10 = secrecy_rate(Vec2(150, 0), Vec2(0, 50), 0, sc);
  const double r11 = secrecy_rate(Vec2(150, 0), Vec2(0, 50), 1, sc);
  CHECK(thr[0] == doctest::Approx(p.dt * (r00 + 0.75 * r10)));
  CHECK(thr[1] == doctest::Approx(p.dt * 0.25 * r11));
  // Static path: the integrated and the midpoint throughput coincide.
  DiscretePath still = p;
  still.pos_S = {Vec2(70, 30), Vec2(70, 30), Vec2(70, 30)};
  const auto a = td_model_throughput(still, sc), b = td_throughput(still, sc);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
}

TEST_CASE("optimized path respects speed and separation, trace is monotone") {
  const Scenario sc = random_scenario(3, 3);
  TdConfig cfg;
  cfg.N0 = 12;
  cfg.max_outer = 30;
  const TdResult r = run_td(sc, cfg);
  REQUIRE(r.path.size() == 13);
  for (std::size_t n = 0; n + 1 < r.path.size(); ++n) {
    CHECK((r.path.pos_S[n + 1] - r.path.pos_S[n]).norm() <= sc.V * r.path.dt + 1e-6);
    CHECK((r.path.pos_J[n + 1] - r.path.pos_J[n]).norm() <= sc.V * r.path.dt + 1e-6);
  }
  CHECK(r.report.audit.min_pair_distance >= sc.d_min - 1e-3);
  CHECK(r.report.audit.scheduling_binary);
  for (std::size_t i = 1; i < r.report.objective_trace.size(); ++i)
    CHECK(r.report.objective_trace[i] >= r.report.objective_trace[i - 1] - 1e-6);
  const auto thr = td_throughput(r.path, sc);
  CHECK(r.report.objective == doctest::Approx(*std::min_element(thr.begin(), thr.end())));
  CHECK(r.report.objective > 0);
}
