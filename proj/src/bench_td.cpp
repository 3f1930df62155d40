#include "coshf/bench_td.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <tuple>

#include "coshf/bounds.hpp"
#include "coshf/channel.hpp"
#include "coshf/quadrature.hpp"

namespace uavsec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Interior boundary points 1..N0-1 of both UAVs are free; ends are pinned.
struct TdLayout {
  int N0 = 0, K = 0;
  bool sched_vars = true;
  int n = 0;

  int point(Uav u, int m) const {
    if (m <= 0 || m >= N0) return -1;
    return (u == Uav::S ? 0 : 2 * (N0 - 1)) + 2 * (m - 1);
  }
  int a(int slot, int k) const { return sched_vars ? 4 * (N0 - 1) + slot * K + k : -1; }
  int U() const { return n - 1; }
};

TdLayout make_td_layout(int N0, int K, bool sched_vars) {
  TdLayout L;
  L.N0 = N0;
  L.K = K;
  L.sched_vars = sched_vars;
  L.n = 4 * (N0 - 1) + (sched_vars ? N0 * K : 0) + 1;
  return L;
}

struct TdSurrogate {
  Scenario sc;
  DiscretePath ref;
  TdLayout layout;
  double dt = 0.0;
  double floor = kRefFloor;
  std::vector<RateBound> rates;  // slot-major, N0 x K

  Vec2 pos(const Eigen::VectorXd& x, Uav u, int m) const {
    const int idx = layout.point(u, m);
    if (idx >= 0) return x.segment<2>(idx);
    return u == Uav::S ? ref.pos_S[static_cast<std::size_t>(m)] : ref.pos_J[static_cast<std::size_t>(m)];
  }

  double user_bound(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
    const int K = layout.K;
    double total = 0.0;
    for (int s = 0; s < layout.N0; ++s) {
      const RateBound& rb = rates[static_cast<std::size_t>(s * K + k)];
      if (!rb.judged) continue;
      const int ia = layout.a(s, k);
      const int p[4] = {layout.point(Uav::S, s), layout.point(Uav::S, s + 1), layout.point(Uav::J, s),
                        layout.point(Uav::J, s + 1)};
      int map[9] = {ia};
      for (int q = 0; q < 4; ++q) {
        map[1 + 2 * q] = p[q];
        map[2 + 2 * q] = p[q] < 0 ? -1 : p[q] + 1;
      }
      const PointJet mS = lerp(PointJet::var(9, 1, pos(x, Uav::S, s)), PointJet::var(9, 3, pos(x, Uav::S, s + 1)), 0.5);
      const PointJet mJ = lerp(PointJet::var(9, 5, pos(x, Uav::J, s)), PointJet::var(9, 7, pos(x, Uav::J, s + 1)), 0.5);
      const Jet h = rb.h(mS, mJ);
      if (std::isnan(h.v)) return kNaN;
      Jet v(9);
      if (ia >= 0) {
        const double a_ref = ref.sched(s, k);
        v = product_bound_fixed_t(dt, Jet::var(9, 0, x[ia]), h, rb.B1, a_ref, rb.h_ref(), floor);
      } else {
        const double a0 = ref.sched(s, k);
        if (a0 <= 0.0) continue;
        v = (dt * a0) * (-h + rb.B1);
      }
      total += v.v;
      scatter(v, map, 1.0, grad, hess);
    }
    return total;
  }
};

class TdUserThroughput final : public ConcaveFunction {
 public:
  TdUserThroughput(std::shared_ptr<const TdSurrogate> s, int k) : s_(std::move(s)), k_(k) {}
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const override {
    const double u = s_->user_bound(k_, x, grad, hess);
    if (grad) (*grad)[s_->layout.U()] -= 1.0;
    return u - x[s_->layout.U()];
  }

 private:
  std::shared_ptr<const TdSurrogate> s_;
  int k_;
};

void add_point(AffineForm& f, const TdSurrogate& s, Uav u, int m, const Vec2& coef) {
  const int idx = s.layout.point(u, m);
  if (idx >= 0) {
    f.add(idx, coef.x());
    f.add(idx + 1, coef.y());
  } else {
    f.b += coef.dot(u == Uav::S ? s.ref.pos_S[static_cast<std::size_t>(m)] : s.ref.pos_J[static_cast<std::size_t>(m)]);
  }
}

struct TdProblem {
  std::shared_ptr<TdSurrogate> surrogate;
  ConvexProblem problem;
  Eigen::VectorXd x_ref;
};

TdProblem assemble_td(const DiscretePath& ref, const Scenario& sc, bool sched_vars, double floor) {
  auto sp = std::make_shared<TdSurrogate>();
  TdSurrogate& s = *sp;
  const int N0 = static_cast<int>(ref.size()) - 1;
  const int K = sc.K;
  s.sc = sc;
  s.ref = ref;
  s.dt = ref.dt;
  s.floor = floor;
  s.layout = make_td_layout(N0, K, sched_vars);
  for (int n = 0; n < N0; ++n) {
    const Vec2 mS = 0.5 * (ref.pos_S[static_cast<std::size_t>(n)] + ref.pos_S[static_cast<std::size_t>(n + 1)]);
    const Vec2 mJ = 0.5 * (ref.pos_J[static_cast<std::size_t>(n)] + ref.pos_J[static_cast<std::size_t>(n + 1)]);
    for (int k = 0; k < K; ++k) s.rates.push_back(make_rate_bound(mS, mJ, k, sc));
  }

  const TdLayout& L = s.layout;
  TdProblem out;
  ConvexProblem& P = out.problem;
  P.n = L.n;
  for (const char* u : {"S", "J"})
    for (int m = 1; m < N0; ++m)
      for (const char* c : {"x", "y"}) P.var_names.push_back(std::string("q") + u + "[" + std::to_string(m) + "]." + c);
  if (sched_vars)
    for (int n = 0; n < N0; ++n)
      for (int k = 0; k < K; ++k)
        P.var_names.push_back("a[" + std::to_string(n) + "," + std::to_string(k) + "]");
  P.var_names.push_back("U");
  P.c = Eigen::VectorXd::Zero(L.n);
  P.c[L.U()] = 1.0;

  if (sched_vars) {
    P.A_eq = Eigen::MatrixXd::Zero(N0, L.n);
    P.b_eq = Eigen::VectorXd::Ones(N0);
    for (int n = 0; n < N0; ++n)
      for (int k = 0; k < K; ++k) {
        P.A_eq(n, L.a(n, k)) = 1.0;
        AffineForm f;
        f.add(L.a(n, k), 1.0);
        P.ineq.push_back(Constraint::make_affine("sched_nonneg(" + std::to_string(n) + "," + std::to_string(k) + ")", f));
      }
  }

  // Per-slot displacement |q[n+1] - q[n]| <= V dt.
  for (Uav u : {Uav::S, Uav::J})
    for (int n = 0; n < N0; ++n) {
      if (L.point(u, n) < 0 && L.point(u, n + 1) < 0) continue;
      AffineForm sf;
      sf.b = sc.V * s.dt;
      std::vector<AffineForm> v(2);
      for (int c = 0; c < 2; ++c) {
        const Vec2 e = c == 0 ? Vec2(1, 0) : Vec2(0, 1);
        add_point(v[static_cast<std::size_t>(c)], s, u, n + 1, e);
        add_point(v[static_cast<std::size_t>(c)], s, u, n, -e);
      }
      P.ineq.push_back(Constraint::make_cone(std::string("speed_") + (u == Uav::S ? "S" : "J") + "(" +
                                                 std::to_string(n) + ")",
                                             sf, v));
    }

  // Separation at slot boundaries, linearized at the reference.
  const double d2 = sc.d_min * sc.d_min;
  for (int m = 1; m < N0; ++m) {
    const Vec2 r = ref.pos_S[static_cast<std::size_t>(m)] - ref.pos_J[static_cast<std::size_t>(m)];
    AffineForm f;
    add_point(f, s, Uav::S, m, 2.0 * r);
    add_point(f, s, Uav::J, m, -2.0 * r);
    f.b -= r.squaredNorm() + d2;
    P.ineq.push_back(Constraint::make_affine("collision(" + std::to_string(m) + ")", f));
  }

  // Linearized squared horizontal distances at slot midpoints stay nonnegative.
  auto kappa = [&](Uav u, const Vec2& w, const std::string& name) {
    const auto& pts = u == Uav::S ? ref.pos_S : ref.pos_J;
    for (int n = 0; n < N0; ++n) {
      if (L.point(u, n) < 0 && L.point(u, n + 1) < 0) continue;
      const Vec2 r = 0.5 * (pts[static_cast<std::size_t>(n)] + pts[static_cast<std::size_t>(n + 1)]) - w;
      if (r.squaredNorm() == 0.0) continue;
      AffineForm f;
      add_point(f, s, u, n, r);
      add_point(f, s, u, n + 1, r);
      f.b += -2.0 * r.dot(w) - r.squaredNorm();
      P.ineq.push_back(Constraint::make_affine(name + "(" + std::to_string(n) + ")", f));
    }
  };
  if (sc.P_J > 0.0)
    for (int k = 0; k < K; ++k) kappa(Uav::J, sc.gu_pos[static_cast<std::size_t>(k)], "kappa_J_gu" + std::to_string(k));
  kappa(Uav::S, sc.eve_pos, "kappa_S_eve");

  for (int k = 0; k < K; ++k)
    P.ineq.push_back(
        Constraint::make_concave("throughput(" + std::to_string(k) + ")", std::make_shared<TdUserThroughput>(sp, k)));

  out.x_ref = Eigen::VectorXd::Zero(L.n);
  for (int m = 1; m < N0; ++m) {
    out.x_ref.segment<2>(L.point(Uav::S, m)) = ref.pos_S[static_cast<std::size_t>(m)];
    out.x_ref.segment<2>(L.point(Uav::J, m)) = ref.pos_J[static_cast<std::size_t>(m)];
  }
  if (sched_vars)
    for (int n = 0; n < N0; ++n)
      for (int k = 0; k < K; ++k) out.x_ref[L.a(n, k)] = ref.sched(n, k);
  double umin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) umin = std::min(umin, s.user_bound(k, out.x_ref, nullptr, nullptr));
  out.x_ref[L.U()] = umin;
  out.surrogate = sp;
  return out;
}

void unpack(const TdLayout& L, const Eigen::VectorXd& x, DiscretePath& path) {
  for (int m = 1; m < L.N0; ++m) {
    path.pos_S[static_cast<std::size_t>(m)] = x.segment<2>(L.point(Uav::S, m));
    path.pos_J[static_cast<std::size_t>(m)] = x.segment<2>(L.point(Uav::J, m));
  }
  if (L.sched_vars) {
    for (int n = 0; n < L.N0; ++n)
      for (int k = 0; k < L.K; ++k) path.sched(n, k) = x[L.a(n, k)];
    path.sched.row(L.N0) = path.sched.row(L.N0 - 1);
  }
  path.sched = path.sched.cwiseMax(0.0).cwiseMin(1.0);
  for (Eigen::Index r = 0; r < path.sched.rows(); ++r) {
    const double sum = path.sched.row(r).sum();
    if (sum > 0.0) path.sched.row(r) /= sum;
  }
}

bool slot_feasible(const DiscretePath& p, const Scenario& sc) {
  const double step = sc.V * p.dt + 1e-9;
  for (std::size_t m = 0; m + 1 < p.size(); ++m) {
    if ((p.pos_S[m + 1] - p.pos_S[m]).norm() > step) return false;
    if ((p.pos_J[m + 1] - p.pos_J[m]).norm() > step) return false;
  }
  for (std::size_t m = 0; m < p.size(); ++m)
    if ((p.pos_S[m] - p.pos_J[m]).norm() < sc.d_min - 1e-6) return false;
  return true;
}

double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

struct TdLoop {
  DiscretePath path;
  RunStatus status = RunStatus::MaxIter;
  std::string message;
  int iters = 0;
  int m_var = 0, m_con = 0;
};

TdLoop td_loop(const Scenario& sc, const DiscretePath& start, const TdConfig& cfg, bool sched_vars,
               std::vector<double>& trace, std::vector<IterationRecord>& records) {
  TdLoop out;
  out.path = start;
  double current = min_of(td_model_throughput(start, sc));
  trace.push_back(current);
  for (int r = 1; r <= cfg.max_outer; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    TdProblem tp = assemble_td(out.path, sc, sched_vars, cfg.eps_ref);
    if (r == 1) {
      out.m_var = tp.problem.n;
      out.m_con = tp.problem.num_constraints();
    }
    const SubproblemSolution sol = solve(tp.problem, tp.x_ref, cfg.solver);
    IterationRecord rec;
    rec.iter = r;
    rec.surrogate = sol.objective;
    rec.kkt_residual = sol.kkt_residual;
    rec.newton_steps = sol.newton_steps;
    out.iters = r;
    if (sol.status == SolveStatus::Infeasible) {
      rec.accepted = false;
      rec.objective = current;
      rec.wallclock = seconds_since(t0);
      records.push_back(rec);
      out.status = RunStatus::Infeasible;
      out.message = "subproblem infeasible at iteration " + std::to_string(r) + " (" + sol.worst_constraint + ")";
      return out;
    }
    DiscretePath cand = out.path;
    unpack(tp.surrogate->layout, sol.x, cand);
    const double next = min_of(td_model_throughput(cand, sc));
    rec.accepted = slot_feasible(cand, sc) && next >= current - 1e-9;
    rec.objective = rec.accepted ? next : current;
    rec.wallclock = seconds_since(t0);
    records.push_back(rec);
    if (!rec.accepted) {
      out.status = RunStatus::Converged;
      return out;
    }
    const double delta = next - current;
    out.path = std::move(cand);
    current = next;
    trace.push_back(current);
    if (std::abs(delta) < cfg.eps) {
      out.status = RunStatus::Converged;
      return out;
    }
  }
  out.message = "iteration cap reached";
  return out;
}

DiscretePath round_rows(const DiscretePath& p) {
  DiscretePath out = p;
  for (Eigen::Index r = 0; r < out.sched.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < out.sched.cols(); ++k)
      if (out.sched(r, k) > out.sched(r, best)) best = k;
    out.sched.row(r).setZero();
    out.sched(r, best) = 1.0;
  }
  return out;
}

}  // namespace

std::vector<double> td_model_throughput(const DiscretePath& path, const Scenario& sc) {
  std::vector<double> out(static_cast<std::size_t>(sc.K), 0.0);
  for (std::size_t n = 0; n + 1 < path.size(); ++n) {
    const double dur = path.t[n + 1] - path.t[n];
    const Vec2 mS = 0.5 * (path.pos_S[n] + path.pos_S[n + 1]);
    const Vec2 mJ = 0.5 * (path.pos_J[n] + path.pos_J[n + 1]);
    for (int k = 0; k < sc.K; ++k) {
      const double a = path.sched(static_cast<Eigen::Index>(n), k);
      if (a != 0.0) out[static_cast<std::size_t>(k)] += dur * a * secrecy_rate(mS, mJ, k, sc);
    }
  }
  return out;
}

std::vector<double> td_throughput(const DiscretePath& path, const Scenario& sc, int quad_order) {
  const QuadratureRule q = gauss_legendre01(quad_order);
  std::vector<double> out(static_cast<std::size_t>(sc.K), 0.0);
  for (std::size_t n = 0; n + 1 < path.size(); ++n) {
    const double dur = path.t[n + 1] - path.t[n];
    for (int g = 0; g < q.order(); ++g) {
      const double z = q.nodes[static_cast<std::size_t>(g)];
      const Vec2 S = path.pos_S[n] + z * (path.pos_S[n + 1] - path.pos_S[n]);
      const Vec2 J = path.pos_J[n] + z * (path.pos_J[n + 1] - path.pos_J[n]);
      for (int k = 0; k < sc.K; ++k) {
        const double a = path.sched(static_cast<Eigen::Index>(n), k);
        if (a != 0.0)
          out[static_cast<std::size_t>(k)] += dur * q.weights[static_cast<std::size_t>(g)] * a * secrecy_rate(S, J, k, sc);
      }
    }
  }
  return out;
}

DiscretePath td_initialize(const Scenario& sc, int N0) {
  validate(sc);
  if (N0 < 2) throw ScenarioError("TD-SCP needs N0 >= 2 slots");
  for (const auto& [a, b, name] : {std::tuple{sc.start_S, sc.end_S, "transmitter"},
                                   std::tuple{sc.start_J, sc.end_J, "jammer"}}) {
    if ((b - a).norm() > sc.V * sc.T * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "endpoints of the " << name << " are " << (b - a).norm() << " m apart, more than V*T = " << sc.V * sc.T;
      throw ScenarioError(os.str());
    }
  }
  const double dt = sc.T / N0;
  DiscretePath path;
  path.dt = dt;
  path.t.resize(static_cast<std::size_t>(N0 + 1));
  path.pos_S.resize(static_cast<std::size_t>(N0 + 1));
  path.pos_J.resize(static_cast<std::size_t>(N0 + 1));
  path.sched = Eigen::MatrixXd::Constant(N0 + 1, sc.K, 1.0 / sc.K);
  for (int m = 0; m <= N0; ++m) path.t[static_cast<std::size_t>(m)] = m * dt;
  path.t.back() = sc.T;

  // Reuse the co-hover-and-fly start when it fits in T; otherwise fall back
  // to straight chords traversed uniformly.
  bool sampled = false;
  try {
    const CoShfTrajectory init = initialize(sc, sc.N, true);
    const DiscretePath d = to_discrete(init, sc, dt);
    for (int m = 0; m <= N0; ++m) {
      const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(m), d.size() - 1);
      path.pos_S[static_cast<std::size_t>(m)] = d.pos_S[i];
      path.pos_J[static_cast<std::size_t>(m)] = d.pos_J[i];
    }
    sampled = true;
  } catch (const ScenarioError&) {
  }
  if (!sampled)
    for (int m = 0; m <= N0; ++m) {
      const double f = static_cast<double>(m) / N0;
      path.pos_S[static_cast<std::size_t>(m)] = sc.start_S + f * (sc.end_S - sc.start_S);
      path.pos_J[static_cast<std::size_t>(m)] = sc.start_J + f * (sc.end_J - sc.start_J);
    }
  path.pos_S.front() = sc.start_S;
  path.pos_S.back() = sc.end_S;
  path.pos_J.front() = sc.start_J;
  path.pos_J.back() = sc.end_J;
  if (!slot_feasible(path, sc)) throw ScenarioError("TD-SCP initial point violates per-slot speed or separation");
  return path;
}

TdResult run_td_from(const Scenario& sc, const DiscretePath& init, const TdConfig& cfg) {
  if (!(cfg.eps > 0.0) || cfg.max_outer < 1) throw std::invalid_argument("TdConfig: eps > 0 and max_outer >= 1");
  TdResult res;
  SolveReport& rep = res.report;

  const auto t_main = std::chrono::steady_clock::now();
  TdLoop main = td_loop(sc, init, cfg, true, rep.objective_trace, rep.iterations);
  rep.wallclock_main = seconds_since(t_main);
  rep.iters = main.iters;
  rep.m_var = main.m_var;
  rep.m_con = main.m_con;
  rep.status = main.status;
  rep.message = main.message;
  res.relaxed = main.path;
  rep.throughput_relaxed = td_throughput(res.relaxed, sc, cfg.quad_order);

  res.path = res.relaxed;
  if (cfg.round_schedule && main.status != RunStatus::Infeasible) {
    const auto t_pol = std::chrono::steady_clock::now();
    std::vector<IterationRecord> pol_records;
    TdLoop pol = td_loop(sc, round_rows(res.relaxed), cfg, false, rep.polish_trace, pol_records);
    rep.wallclock_polish = seconds_since(t_pol);
    rep.polish_iters = pol.iters;
    res.path = pol.path;
    if (pol.status == RunStatus::Infeasible) {
      rep.status = RunStatus::Infeasible;
      rep.message = "polish: " + pol.message;
    } else if (pol.status == RunStatus::MaxIter && rep.status == RunStatus::Converged) {
      rep.status = RunStatus::MaxIter;
      rep.message = "polish: " + pol.message;
    }
  }
  rep.throughput = td_throughput(res.path, sc, cfg.quad_order);
  rep.objective = min_of(rep.throughput);
  rep.audit = audit(res.path, sc, rep.throughput, cfg.audit_samples);
  return res;
}

TdResult run_td(const Scenario& sc, const TdConfig& cfg) { return run_td_from(sc, td_initialize(sc, cfg.N0), cfg); }

}  // namespace uavsec
