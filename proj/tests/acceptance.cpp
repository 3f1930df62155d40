// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 unless
// something throws; failing criteria are reported, not fatal.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "coshf/audit.hpp"
#include "coshf/bench_td.hpp"
#include "coshf/channel.hpp"
#include "coshf/convexify.hpp"
#include "coshf/sca.hpp"
#include "oracles.hpp"

using namespace uavsec;

namespace {

// Seeds for every multi-seed criterion, fixed before any result was seen.
constexpr std::uint64_t kSeedFirst = 101, kSeedLast = 110;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void verdict(int n, bool pass, const std::string& detail) {
  std::printf("CRITERION %d %s: %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[4096];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Random reference: jittered initial point with fractional scheduling.
CoShfTrajectory random_reference(const Scenario& sc, std::mt19937_64& rng) {
  CoShfTrajectory t = initialize(sc, sc.N);
  std::normal_distribution<double> nd(0, 30);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (auto* v : {&t.hover_S, &t.hover_J, &t.turn_S, &t.turn_J})
    for (auto& p : *v) p += Vec2(nd(rng), nd(rng));
  for (auto& d : t.hover_dur) d *= 0.5 + u(rng);
  for (Eigen::MatrixXd* m : {&t.sched_hover, &t.sched_fly})
    for (int r = 0; r < m->rows(); ++r) {
      for (int c = 0; c < m->cols(); ++c) (*m)(r, c) = u(rng);
      m->row(r) /= m->row(r).sum();
    }
  return t;
}

// Perturbation of a reference that stays in the natural variable ranges.
CoShfTrajectory perturb(const CoShfTrajectory& ref, std::mt19937_64& rng) {
  CoShfTrajectory t = ref;
  std::normal_distribution<double> nd(0, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto* v : {&t.hover_S, &t.hover_J, &t.turn_S, &t.turn_J})
    for (auto& p : *v) p += Vec2(nd(rng), nd(rng));
  for (auto& d : t.hover_dur) d *= 0.2 + 1.6 * u(rng);
  for (Eigen::MatrixXd* m : {&t.sched_hover, &t.sched_fly})
    for (int r = 0; r < m->rows(); ++r) {
      Eigen::RowVectorXd q(m->cols());
      for (int c = 0; c < m->cols(); ++c) q[c] = u(rng);
      q /= q.sum();
      const double w = u(rng);
      m->row(r) = (1 - w) * m->row(r) + w * q;
    }
  return t;
}

// Flight contribution of user k on one segment, computed from the raw chords.
double fly_true(const CoShfTrajectory& t, int seg, int k, const Scenario& sc, const QuadratureRule& q) {
  const SegmentIndex s = t.segment(seg);
  const auto [S0, S1] = t.segment_ends(Uav::S, s);
  const auto [J0, J1] = t.segment_ends(Uav::J, s);
  const double tau = std::max((S1 - S0).norm(), (J1 - J0).norm()) / sc.V;
  double acc = 0;
  for (int n = 0; n < q.order(); ++n) {
    const double z = q.nodes[static_cast<std::size_t>(n)];
    acc += q.weights[static_cast<std::size_t>(n)] * oracle::secrecy(S0 + z * (S1 - S0), J0 + z * (J1 - J0), k, sc);
  }
  return t.sched_fly(seg, k) * tau * acc;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-12); }

struct Worst {
  double v = 0;
  std::string where;
  void take(double x, const std::string& w) {
    if (!(x <= v)) {  // NaN counts as worst
      v = std::isnan(x) ? INFINITY : x;
      where = w;
    }
  }
};

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = default_scenario();
  std::mt19937_64 rng(1001);
  const QuadratureRule q = gauss_legendre01(8);
  Worst exact, quad;
  for (int r = 0; r < 10; ++r) {
    const CoShfTrajectory ref = random_reference(sc, rng);
    const AssembledProblem ap = assemble(ref, sc);
    const Surrogate& s = *ap.surrogate;
    for (int i = 1; i <= sc.K; ++i)
      for (int k = 0; k < sc.K; ++k) {
        const Vec2 S = ref.hover_S[static_cast<std::size_t>(i - 1)], J = ref.hover_J[static_cast<std::size_t>(i - 1)];
        const RateBound rb = hover_rate_bound(ref, i, k, sc);
        const double gap = secrecy_gap(S, J, k, sc);
        exact.take(rel_err(rb.value(S, J), rb.judged ? gap : 0.0), fmt("rate bound ref %d pair %d user %d", r, i, k));
        const HoverTermBound& hb = s.hover[static_cast<std::size_t>((i - 1) * sc.K + k)];
        const double a = ref.sched_hover(i - 1, k), t = ref.hover_dur[static_cast<std::size_t>(i - 1)];
        exact.take(rel_err(hb.active() ? hb.value(a, t, S, J) : 0.0, a * t * oracle::secrecy(S, J, k, sc)),
                   fmt("hover product ref %d pair %d user %d", r, i, k));
      }
    for (int seg = 0; seg < ref.num_segments(); ++seg) {
      const auto [S0, S1] = ref.segment_ends(Uav::S, ref.segment(seg));
      const auto [J0, J1] = ref.segment_ends(Uav::J, ref.segment(seg));
      const CollisionBound& cb = s.collision[static_cast<std::size_t>(seg)];
      for (double z : {0.0, 0.5, 1.0, cb.z_star}) {
        const Vec2 d = (1 - z) * (S0 - J0) + z * (S1 - J1);
        exact.take(rel_err(cb.eval(z, S0, S1, J0, J1), d.squaredNorm()), fmt("separation ref %d seg %d", r, seg));
      }
      for (int k = 0; k < sc.K; ++k) {
        const FlyTermBound& fb = s.fly[static_cast<std::size_t>(seg * sc.K + k)];
        const double bound = fb.active() ? fb.value(ref.sched_fly(seg, k), S0, S1, J0, J1) : 0.0;
        quad.take(rel_err(bound, fly_true(ref, seg, k, sc, q)), fmt("flight product ref %d seg %d user %d", r, seg, k));
      }
    }
    const auto thr = throughput(ref, sc, 8);
    for (int k = 0; k < sc.K; ++k)
      quad.take(rel_err(s.user_bound(k, ap.x_ref, nullptr, nullptr), thr[static_cast<std::size_t>(k)]),
                fmt("user throughput ref %d user %d", r, k));
  }
  const double wall = seconds_since(t0);
  const bool pass = exact.v <= 1e-6 && quad.v <= 1e-5 && wall < 60;
  verdict(1, pass, fmt("worst rel err %.2e (%s), quadrature-backed %.2e (%s), %.1f s", exact.v, exact.where.c_str(),
                       quad.v, quad.where.c_str(), wall));
}

void criterion2() {
  const Scenario sc = default_scenario();
  std::mt19937_64 rng(2002);
  const QuadratureRule q = gauss_legendre01(8);
  double worst = INFINITY;
  std::string where;
  long checked = 0, skipped = 0;
  auto take = [&](double slack, const std::string& w) {
    if (!std::isfinite(slack)) {
      ++skipped;
      return;
    }
    ++checked;
    if (slack < worst) {
      worst = slack;
      where = w;
    }
  };
  const CoShfTrajectory ref = random_reference(sc, rng);
  const AssembledProblem ap = assemble(ref, sc);
  const Surrogate& s = *ap.surrogate;
  constexpr int kPerBound = 1000;
  // Each bound family gets its own 1000 perturbations; every member of the
  // family is checked on each.
  for (int m = 0; m < kPerBound; ++m) {
    const CoShfTrajectory p = perturb(ref, rng);
    for (int i = 1; i <= sc.K; ++i)
      for (int k = 0; k < sc.K; ++k) {
        const Vec2 S = p.hover_S[static_cast<std::size_t>(i - 1)], J = p.hover_J[static_cast<std::size_t>(i - 1)];
        const RateBound rb = hover_rate_bound(ref, i, k, sc);
        take(oracle::secrecy(S, J, k, sc) - rb.value(S, J), "rate bound");
        const HoverTermBound& hb = s.hover[static_cast<std::size_t>((i - 1) * sc.K + k)];
        if (!hb.active()) continue;
        const double a = p.sched_hover(i - 1, k), t = p.hover_dur[static_cast<std::size_t>(i - 1)];
        take(a * t * oracle::secrecy(S, J, k, sc) - hb.value(a, t, S, J), "hover product");
      }
  }
  for (int m = 0; m < kPerBound; ++m) {
    const CoShfTrajectory p = perturb(ref, rng);
    for (int seg = 0; seg < p.num_segments(); ++seg) {
      const auto [S0, S1] = p.segment_ends(Uav::S, p.segment(seg));
      const auto [J0, J1] = p.segment_ends(Uav::J, p.segment(seg));
      for (int k = 0; k < sc.K; ++k) {
        const FlyTermBound& fb = s.fly[static_cast<std::size_t>(seg * sc.K + k)];
        if (!fb.active()) continue;
        take(fly_true(p, seg, k, sc, q) - fb.value(p.sched_fly(seg, k), S0, S1, J0, J1), "flight product");
      }
    }
  }
  for (int m = 0; m < kPerBound; ++m) {
    const CoShfTrajectory p = perturb(ref, rng);
    std::uniform_real_distribution<double> u(0, 1);
    for (int seg = 0; seg < p.num_segments(); ++seg) {
      const auto [S0, S1] = p.segment_ends(Uav::S, p.segment(seg));
      const auto [J0, J1] = p.segment_ends(Uav::J, p.segment(seg));
      const double z = u(rng);
      const Vec2 d = (1 - z) * (S0 - J0) + z * (S1 - J1);
      take(d.squaredNorm() - s.collision[static_cast<std::size_t>(seg)].eval(z, S0, S1, J0, J1), "separation");
    }
  }
  for (int m = 0; m < kPerBound; ++m) {
    const CoShfTrajectory p = perturb(ref, rng);
    const Eigen::VectorXd x = s.layout.pack(p, 0.0);
    const auto thr = throughput(p, sc, 8);
    for (int k = 0; k < sc.K; ++k) take(thr[static_cast<std::size_t>(k)] - s.user_bound(k, x, nullptr, nullptr), "user throughput");
  }
  verdict(2, worst >= -1e-9,
          fmt("min slack %.3e (%s) over %ld checks, %ld outside the bound domain", worst, where.c_str(), checked, skipped));
}

void criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc = default_scenario();
  sc.K = 1;
  sc.gu_pos.resize(1);
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int n = 0; n < 10000; ++n) {
    CoShfTrajectory t = CoShfTrajectory::blank(sc, 0);
    t.start_S = oracle::rand_point(rng, 0, 500);
    t.start_J = oracle::rand_point(rng, 0, 500);
    t.hover_S[0] = oracle::rand_point(rng, 0, 500);
    t.hover_J[0] = oracle::rand_point(rng, 0, 500);
    if (n % 10 == 1) t.hover_J[0] = t.hover_S[0] + (t.start_J - t.start_S);               // parallel
    if (n % 10 == 2) t.hover_J[0] = t.start_S + u(rng) * (t.hover_S[0] - t.start_S);       // near crossing
    if (n % 10 == 3) t.hover_S[0] = t.start_S;                                             // one UAV still
    const Vec2 p = t.start_S - t.start_J, v = (t.hover_S[0] - t.hover_J[0]) - p;
    const double ref = oracle::grid_min_distance(p, v);
    worst = std::max({worst, std::abs(std::sqrt(collision_bound(t, 0).eta()) - ref),
                      std::abs(min_pair_distance(t, {0, 0}) - ref)});
  }
  const double wall = seconds_since(t0);
  verdict(3, worst <= 1e-6 && wall < 30, fmt("max |closed form - grid| %.2e m over 10000 pairs, %.1f s", worst, wall));
}

struct DefaultRun {
  ScaResult res;
  double wall = 0;
};

void criterion4(const DefaultRun& d) {
  const auto& tr = d.res.report.objective_trace;
  double worst_drop = 0;
  for (std::size_t i = 1; i < tr.size(); ++i) worst_drop = std::max(worst_drop, tr[i - 1] - tr[i]);
  for (std::size_t i = 1; i < d.res.report.polish_trace.size(); ++i)
    worst_drop = std::max(worst_drop, d.res.report.polish_trace[i - 1] - d.res.report.polish_trace[i]);
  const bool pass = worst_drop <= 1e-6 && d.res.report.converged() && d.res.report.iters <= 30 && d.wall <= 300;
  std::string trace;
  for (std::size_t i = 0; i < tr.size(); i += std::max<std::size_t>(1, tr.size() / 10)) trace += fmt(" %.3f", tr[i]);
  verdict(4, pass,
          fmt("status %s, %d iterations (+%d polish), max decrease %.1e, %.1f s, objective %.4f; trace:%s",
              to_string(d.res.report.status), d.res.report.iters, d.res.report.polish_iters, worst_drop, d.wall,
              d.res.report.objective, trace.c_str()));
}

std::vector<std::uint64_t> seeds() {
  std::vector<std::uint64_t> s;
  for (std::uint64_t x = kSeedFirst; x <= kSeedLast; ++x) s.push_back(x);
  return s;
}

void criterion5(const DefaultRun& d, const std::vector<double>& dual_seed) {
  const Scenario sc = default_scenario();
  const double single_default = run_single_uav(sc).report.objective;
  const bool default_ok = d.res.report.objective >= single_default;
  int wins = 0;
  std::string detail;
  const auto ss = seeds();
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const double single = run_single_uav(random_scenario(ss[i], 4)).report.objective;
    wins += dual_seed[i] >= single;
    detail += fmt(" %llu:%.4g/%.4g", static_cast<unsigned long long>(ss[i]), dual_seed[i], single);
  }
  verdict(5, default_ok && wins >= 8,
          fmt("default %.2f vs %.2f; dual >= single on %d/10 seeds (dual/single):%s", d.res.report.objective,
              single_default, wins, detail.c_str()));
}

void criterion6(const DefaultRun& d, const TdResult& td, double td_wall) {
  const double rel = (td.report.objective - d.res.report.objective) / d.res.report.objective;
  const bool pass = std::abs(rel) <= 0.10 && d.wall <= 0.5 * td_wall;
  verdict(6, pass,
          fmt("TD(N0=40) %.3f vs co-SHF %.3f (%+.1f%%); wallclock %.1f s vs %.1f s (ratio %.2f)", td.report.objective,
              d.res.report.objective, 100 * rel, d.wall, td_wall, d.wall / td_wall));
}

void criterion7(const DefaultRun& d) {
  const Scenario sc = default_scenario();
  const CoShfTrajectory& t = d.res.solution;
  double worst = 0;
  int moving = 0;
  for (int s = 0; s < t.num_segments(); ++s) {
    const double tau = segment_time(t, t.segment(s), sc.V);
    if (!(tau > 0)) continue;
    ++moving;
    const double vS = segment_length(t, Uav::S, t.segment(s)) / tau;
    const double vJ = segment_length(t, Uav::J, t.segment(s)) / tau;
    worst = std::max(worst, std::abs(std::max(vS, vJ) - sc.V));
  }
  int long_hovers = 0;
  for (double h : t.hover_dur) long_hovers += h > 0.01 * sc.T;
  const double slack = d.res.report.audit.time_budget_slack;
  const bool pass = worst <= 1e-9 && long_hovers <= sc.K && std::abs(slack) <= 1e-3 * sc.T &&
                    d.res.report.audit.max_speed <= sc.V + 1e-6;
  verdict(7, pass,
          fmt("max |speed - V| %.1e on %d moving segments, audited max speed %.6f, %d hover pairs > 0.01T, slack %.2e s",
              worst, moving, d.res.report.audit.max_speed, long_hovers, slack));
}

void criterion8(const std::vector<std::vector<double>>& curves) {
  int interior = 0;
  std::string detail;
  const auto ss = seeds();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const auto best = std::max_element(c.begin(), c.end()) - c.begin();
    interior += best > 0 && best + 1 < static_cast<long>(c.size());
    detail += fmt(" %llu:[%.4g %.4g %.4g %.4g]", static_cast<unsigned long long>(ss[i]), c[0], c[1], c[2], c[3]);
  }
  verdict(8, interior >= 7, fmt("interior best on %d/10 seeds (P_J = 0.1/1/10/100 mW):%s", interior, detail.c_str()));
}

void criterion9(const DefaultRun& d, const ScaResult& single, const TdResult& td) {
  const Scenario sc = default_scenario();
  Scenario quiet = sc;
  quiet.P_J = 0;
  struct Case {
    const char* name;
    const Audit* a;
    const Scenario* s;
  };
  const Case cases[] = {{"co-SHF", &d.res.report.audit, &sc}, {"single", &single.report.audit, &quiet},
                        {"TD", &td.report.audit, &sc}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const bool ok = c.a->max_rel_throughput_gap <= 1e-3 && c.a->feasible(*c.s, true);
    pass = pass && ok;
    detail += fmt(" %s: gap %.1e speed %.6f dist %.4f binary %d%s;", c.name, c.a->max_rel_throughput_gap,
                  c.a->max_speed, c.a->jammer_present ? c.a->min_pair_distance : NAN, c.a->scheduling_binary,
                  ok ? "" : " VIOLATION");
    for (const auto& v : c.a->violations(*c.s, true)) detail += " [" + v + "]";
  }
  verdict(9, pass, detail);
}

void criterion10() {
  bool pass = true;
  std::string detail;
  for (auto [K, N] : {std::pair{1, 0}, std::pair{4, 1}, std::pair{6, 2}}) {
    Scenario sc = random_scenario(7, K);
    sc.T = 400;  // room for the six-user tour
    const AssembledProblem ap = assemble(initialize(sc, N), sc);
    const ComplexityCounts c = complexity_counts(K, N);
    const bool ok = ap.problem.n == c.m_var && ap.problem.num_constraints() == c.m_con;
    pass = pass && ok;
    detail += fmt(" (K=%d,N=%d): vars %d vs %lld, constraints %d vs %lld;", K, N, ap.problem.n, c.m_var,
                  ap.problem.num_constraints(), c.m_con);
  }
  verdict(10, pass, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();

  DefaultRun d;
  {
    const auto t0 = std::chrono::steady_clock::now();
    d.res = run(default_scenario());
    d.wall = seconds_since(t0);
  }
  criterion4(d);

  // The per-seed P_J = 1 mW run is shared by criteria 5 and 8.
  std::vector<std::vector<double>> curves;
  std::vector<double> dual_seed;
  for (std::uint64_t seed : seeds()) {
    std::vector<double> c;
    for (double pj_mw : {0.1, 1.0, 10.0, 100.0}) {
      Scenario sc = random_scenario(seed, 4);
      sc.P_J = pj_mw * 1e-3;
      c.push_back(run(sc).report.objective);
    }
    dual_seed.push_back(c[1]);
    curves.push_back(c);
  }
  criterion5(d, dual_seed);

  TdResult td;
  double td_wall = 0;
  {
    TdConfig cfg;
    cfg.N0 = 40;
    const auto t0 = std::chrono::steady_clock::now();
    td = run_td(default_scenario(), cfg);
    td_wall = seconds_since(t0);
  }
  criterion6(d, td, td_wall);
  criterion7(d);
  criterion8(curves);
  criterion9(d, run_single_uav(default_scenario()), td);
  criterion10();
  return 0;
}
