#include <doctest.h>

#include <random>

#include "coshf/convexify.hpp"
#include "coshf/sca.hpp"
#include "oracles.hpp"

using namespace uavsec;

namespace {

// Perturbs positions, hover durations and scheduling, keeping rows on the simplex.
CoShfTrajectory perturb(const CoShfTrajectory& ref, std::mt19937_64& rng, double sigma) {
  CoShfTrajectory t = ref;
  std::normal_distribution<double> nd(0, sigma);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto* v : {&t.hover_S, &t.hover_J, &t.turn_S, &t.turn_J})
    for (auto& p : *v) p += Vec2(nd(rng), nd(rng));
  for (auto& d : t.hover_dur) d *= 0.5 + u(rng);
  auto mix = [&](Eigen::MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r) {
      Eigen::RowVectorXd q(m.cols());
      for (int c = 0; c < m.cols(); ++c) q[c] = u(rng);
      q /= q.sum();
      const double w = u(rng);
      m.row(r) = (1 - w) * m.row(r) + w * q;
    }
  };
  mix(t.sched_hover);
  mix(t.sched_fly);
  return t;
}

}  // namespace

TEST_CASE("published complexity formulas") {
  const auto c = complexity_counts(4, 1);
  CHECK(c.m_var == 2 * 16 + 3 * 16 + 6 * 4 + 6 * 4 + 2);
  CHECK(c.m_con == 6 * 16 + 8 * 16 + 12 * 4 + 13 * 4 + 6 + 3);
  CHECK(complexity_counts(1, 0).m_var == 9);
  CHECK(complexity_counts(1, 0).m_con == 24);
}

TEST_CASE("layout size and index uniqueness") {
  for (int K = 1; K <= 6; ++K)
    for (int N = 0; N <= 3; ++N) {
      const Layout L = make_layout(K, N, true, true);
      CHECK(L.n == K * K * (2 + N) + K * (6 + 5 * N) + 4 * N + 1);
      std::vector<int> seen(static_cast<std::size_t>(L.n), 0);
      auto mark = [&](int i) {
        REQUIRE(i >= 0);
        REQUIRE(i < L.n);
        ++seen[static_cast<std::size_t>(i)];
      };
      for (int i = 1; i <= K; ++i) {
        for (Uav u : {Uav::S, Uav::J}) {
          mark(L.point(u, i, 0));
          mark(L.point(u, i, 0) + 1);
        }
        mark(L.t(i));
        for (int k = 0; k < K; ++k) mark(L.a_hover(i, k));
      }
      for (int i = 0; i <= K; ++i)
        for (int j = 1; j <= N; ++j)
          for (Uav u : {Uav::S, Uav::J}) {
            mark(L.point(u, i, j));
            mark(L.point(u, i, j) + 1);
          }
      for (int s = 0; s < (K + 1) * (N + 1); ++s)
        for (int k = 0; k < K; ++k) mark(L.a_fly(s, k));
      mark(L.U());
      for (int v : seen) CHECK(v == 1);
      CHECK(static_cast<int>(L.names().size()) == L.n);
      const Layout P = make_layout(K, N, false, false);
      CHECK(P.n == 2 * K + 2 * N * (K + 1) + K + 1);
      CHECK(P.point(Uav::J, 1, 0) == -1);
      CHECK(P.a_hover(1, 0) == -1);
    }
}

TEST_CASE("pack and unpack are inverse") {
  const Scenario sc = default_scenario();
  const CoShfTrajectory t = initialize(sc, 1);
  const Layout L = make_layout(sc.K, 1, true, true);
  const Eigen::VectorXd x = L.pack(t, 3.5);
  CHECK(x[L.U()] == 3.5);
  CoShfTrajectory back = CoShfTrajectory::blank(sc, 1);
  L.unpack(x, back);
  CHECK(back == t);
}

TEST_CASE("collision bound") {
  const Scenario sc = default_scenario();
  std::mt19937_64 rng(3);
  const CoShfTrajectory ref = perturb(initialize(sc, 1), rng, 30);
  for (int s = 0; s < ref.num_segments(); ++s) {
    const CollisionBound b = collision_bound(ref, s);
    const auto [S0, S1] = ref.segment_ends(Uav::S, ref.segment(s));
    const auto [J0, J1] = ref.segment_ends(Uav::J, ref.segment(s));
    CHECK(std::sqrt(b.eta()) == doctest::Approx(oracle::grid_min_distance(S0 - J0, (S1 - S0) - (J1 - J0))).epsilon(1e-9));
    for (double z : {0.0, 0.3, 1.0, b.z_star})
      CHECK(b.eval(z, S0, S1, J0, J1) == doctest::Approx(b.dq_ref(z).squaredNorm()));
    for (int m = 0; m < 50; ++m) {
      const CoShfTrajectory p = perturb(ref, rng, 40);
      const auto [s0, s1] = p.segment_ends(Uav::S, p.segment(s));
      const auto [j0, j1] = p.segment_ends(Uav::J, p.segment(s));
      for (double z : {0.0, 0.25, 0.5, 1.0}) {
        const Vec2 d = (1 - z) * (s0 - j0) + z * (s1 - j1);
        CHECK(b.eval(z, s0, s1, j0, j1) <= d.squaredNorm() + 1e-9);
      }
    }
  }
}

TEST_CASE("surrogate is tight at the reference and a lower bound nearby") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Scenario sc = random_scenario(seed, 3);
    std::mt19937_64 rng(seed);
    const CoShfTrajectory ref = perturb(initialize(sc, 1), rng, 5);
    const AssembledProblem ap = assemble(ref, sc);
    CHECK(ap.problem.convexity_audit().empty());
    const Surrogate& s = *ap.surrogate;
    const auto thr = throughput(ref, sc, s.opts.quad_order);
    for (int k = 0; k < sc.K; ++k)
      CHECK(s.user_bound(k, ap.x_ref, nullptr, nullptr) ==
            doctest::Approx(thr[static_cast<std::size_t>(k)]).epsilon(1e-6));
    for (int m = 0; m < 100; ++m) {
      const CoShfTrajectory p = perturb(ref, rng, 25);
      const Eigen::VectorXd x = s.layout.pack(p, 0.0);
      const auto tp = throughput(p, sc, s.opts.quad_order);
      for (int k = 0; k < sc.K; ++k) {
        const double v = s.user_bound(k, x, nullptr, nullptr);
        if (!std::isfinite(v)) continue;
        CHECK(tp[static_cast<std::size_t>(k)] - v >= -1e-9);
      }
    }
  }
}

TEST_CASE("hover term bound") {
  const Scenario sc = default_scenario();
  const CoShfTrajectory ref = initialize(sc, 1);
  std::mt19937_64 rng(12);
  for (int i = 1; i <= sc.K; ++i)
    for (int k = 0; k < sc.K; ++k) {
      const HoverTermBound b = hover_term_bound(ref, i, k, sc);
      const Vec2 S = ref.hover_S[static_cast<std::size_t>(i - 1)], J = ref.hover_J[static_cast<std::size_t>(i - 1)];
      const double a = ref.sched_hover(i - 1, k), t = ref.hover_dur[static_cast<std::size_t>(i - 1)];
      CHECK(b.active() == (judgment_hover(ref, i, k, sc) == 1));
      if (!b.active()) continue;
      CHECK(b.value(a, t, S, J) == doctest::Approx(a * t * secrecy_rate(S, J, k, sc)).epsilon(1e-9));
      std::normal_distribution<double> nd(0, 30);
      std::uniform_real_distribution<double> u(0.01, 1.0);
      for (int m = 0; m < 200; ++m) {
        const double aa = u(rng), tt = 20 * u(rng);
        const Vec2 s = S + Vec2(nd(rng), nd(rng)), j = J + Vec2(nd(rng), nd(rng));
        const double v = b.value(aa, tt, s, j);
        if (std::isfinite(v)) CHECK(aa * tt * secrecy_rate(s, j, k, sc) - v >= -1e-9);
      }
    }
}

TEST_CASE("constraint dump names every variable") {
  const Scenario sc = default_scenario();
  const AssembledProblem ap = assemble(initialize(sc, 1), sc);
  const std::string d = ap.problem.dump();
  CHECK(d.find("U") != std::string::npos);
  CHECK(d.find("[soc]") != std::string::npos);
  CHECK(ap.problem.n == static_cast<int>(ap.problem.var_names.size()));
}
