#include "coshf/sca.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "coshf/convexify.hpp"
#include "coshf/tsp.hpp"

namespace uavsec {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIter: return "max_iter";
    case RunStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double min_separation(const CoShfTrajectory& tr) {
  double m = std::numeric_limits<double>::infinity();
  for (int s = 0; s < tr.num_segments(); ++s) m = std::min(m, min_pair_distance(tr, tr.segment(s)));
  return m;
}

// Vertex parameter of the squared separation on one segment.
double closest_z(const CoShfTrajectory& tr, int seg) {
  const auto [s0, s1] = tr.segment_ends(Uav::S, tr.segment(seg));
  const auto [j0, j1] = tr.segment_ends(Uav::J, tr.segment(seg));
  const Vec2 p = s0 - j0;
  const Vec2 v = (s1 - j1) - p;
  const double vv = v.squaredNorm();
  return vv > 0.0 ? std::clamp(-p.dot(v) / vv, 0.0, 1.0) : 0.0;
}

void sanitize(CoShfTrajectory& tr) {
  for (double& t : tr.hover_dur) t = std::max(t, 0.0);
  for (Eigen::MatrixXd* m : {&tr.sched_hover, &tr.sched_fly}) {
    *m = m->cwiseMax(0.0).cwiseMin(1.0);
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      const double s = m->row(r).sum();
      if (s > 0.0) m->row(r) /= s;
    }
  }
}

struct LoopOutcome {
  CoShfTrajectory traj;
  RunStatus status = RunStatus::Converged;
  std::string message;
  int iters = 0;
  int m_var = 0, m_con = 0;
};

LoopOutcome sca_loop(const Scenario& sc, const CoShfTrajectory& start, const ScaConfig& cfg, bool sched_vars,
                     std::vector<double>& trace, std::vector<IterationRecord>& records) {
  LoopOutcome out;
  out.traj = start;
  double current = min_throughput(start, sc, cfg.quad_order);
  trace.push_back(current);
  out.status = RunStatus::MaxIter;

  SurrogateOptions sopt;
  sopt.quad_order = cfg.quad_order;
  sopt.sched_vars = sched_vars;
  sopt.ref_floor = cfg.eps_ref;

  for (int r = 1; r <= cfg.max_outer; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    sopt.collision_cuts.clear();
    CoShfTrajectory cand;
    SubproblemSolution sol;
    for (int round = 0;; ++round) {
      AssembledProblem ap = assemble(out.traj, sc, sopt);
      if (r == 1 && round == 0) {
        out.m_var = ap.problem.n;
        out.m_con = ap.problem.num_constraints();
      }
      sol = solve(ap.problem, ap.x_ref, cfg.solver);
      if (sol.status == SolveStatus::Infeasible) break;
      cand = out.traj;
      ap.surrogate->layout.unpack(sol.x, cand);
      sanitize(cand);
      if (!cand.jammer_active || round >= cfg.collision_rounds) break;
      bool cut = false;
      for (int s = 0; s < cand.num_segments(); ++s)
        if (min_pair_distance(cand, cand.segment(s)) < sc.d_min) {
          sopt.collision_cuts.emplace_back(s, closest_z(cand, s));
          cut = true;
        }
      if (!cut) break;
    }

    IterationRecord rec;
    rec.iter = r;
    rec.surrogate = sol.objective;
    rec.kkt_residual = sol.kkt_residual;
    rec.newton_steps = sol.newton_steps;
    if (sol.status == SolveStatus::Infeasible) {
      rec.accepted = false;
      rec.objective = current;
      rec.wallclock = seconds_since(t0);
      records.push_back(rec);
      out.status = RunStatus::Infeasible;
      out.message = "subproblem infeasible at iteration " + std::to_string(r) + " (" + sol.worst_constraint + ")";
      out.iters = r;
      return out;
    }

    const double next = min_throughput(cand, sc, cfg.quad_order);
    const bool feasible = total_time(cand, sc) <= sc.T * (1.0 + 1e-9) &&
                          (!cand.jammer_active || min_separation(cand) >= sc.d_min - 1e-6);
    rec.accepted = feasible && next >= current - 1e-9;
    rec.objective = rec.accepted ? next : current;
    rec.wallclock = seconds_since(t0);
    records.push_back(rec);
    out.iters = r;
    if (!rec.accepted) {
      // No improving step from this reference: it is a fixed point of the iteration.
      out.status = RunStatus::Converged;
      return out;
    }
    const double delta = next - current;
    out.traj = cand;
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

}  // namespace

CoShfTrajectory initialize(const Scenario& sc, int N, bool jammer_active) {
  validate(sc);
  if (N < 0) throw ScenarioError("N must be >= 0");
  CoShfTrajectory tr = CoShfTrajectory::blank(sc, N);
  tr.jammer_active = jammer_active;
  const std::vector<int> order = open_path_order(sc.start_S, sc.gu_pos, sc.end_S);
  for (int i = 0; i < sc.K; ++i) tr.hover_S[i] = sc.gu_pos[order[i]];
  for (int i = 0; i <= sc.K; ++i) {
    const Vec2 a = tr.point(Uav::S, i, 0), b = tr.point(Uav::S, i + 1, 0);
    for (int j = 1; j <= N; ++j) tr.point(Uav::S, i, j) = a + (static_cast<double>(j) / (N + 1)) * (b - a);
  }
  const int M = (sc.K + 1) * (N + 1);
  auto place_jammer = [&](const Vec2& offset) {
    for (int i = 0; i <= sc.K; ++i)
      for (int j = 0; j <= N; ++j) {
        if (i == 0 && j == 0) continue;
        const double f = static_cast<double>(i * (N + 1) + j) / M;
        tr.point(Uav::J, i, j) = sc.start_J + f * (sc.end_J - sc.start_J) + offset;
      }
  };
  place_jammer(Vec2::Zero());

  if (jammer_active) {
    const double sep = min_separation(tr);
    if (sep < sc.d_min) {
      const Vec2 chord = sc.end_J - sc.start_J;
      Vec2 nrm = chord.norm() > 0.0 ? Vec2(-chord.y(), chord.x()).normalized() : Vec2(0.0, 1.0);
      const double shift = sc.d_min - sep + 0.1;
      CoShfTrajectory best = tr;
      double best_sep = sep;
      for (double sign : {1.0, -1.0}) {
        place_jammer(sign * shift * nrm);
        const double s = min_separation(tr);
        if (s > best_sep) {
          best_sep = s;
          best = tr;
        }
      }
      tr = best;
      if (best_sep < sc.d_min) {
        std::ostringstream os;
        os << "initial separation " << best_sep << " m below d_min after lateral repair";
        throw ScenarioError(os.str());
      }
    }
  }

  double flight = 0.0;
  for (int s = 0; s < tr.num_segments(); ++s) flight += segment_time(tr, tr.segment(s), sc.V);
  if (flight > sc.T) {
    std::ostringstream os;
    os << "time budget insufficient: the initial tour needs T >= " << flight << " s";
    throw ScenarioError(os.str());
  }
  for (double& t : tr.hover_dur) t = (sc.T - flight) / sc.K;
  return tr;
}

CoShfTrajectory round_schedule(const CoShfTrajectory& traj) {
  CoShfTrajectory out = traj;
  for (Eigen::MatrixXd* m : {&out.sched_hover, &out.sched_fly})
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < m->cols(); ++k)
        if ((*m)(r, k) > (*m)(r, best)) best = k;
      m->row(r).setZero();
      (*m)(r, best) = 1.0;
    }
  return out;
}

ScaResult run_from(const Scenario& sc, const CoShfTrajectory& init, const ScaConfig& cfg) {
  if (!(cfg.eps > 0.0) || cfg.max_outer < 1) throw std::invalid_argument("ScaConfig: eps > 0 and max_outer >= 1");
  ScaResult res;
  SolveReport& rep = res.report;

  const auto t_main = std::chrono::steady_clock::now();
  LoopOutcome main = sca_loop(sc, init, cfg, true, rep.objective_trace, rep.iterations);
  rep.wallclock_main = seconds_since(t_main);
  rep.iters = main.iters;
  rep.m_var = main.m_var;
  rep.m_con = main.m_con;
  rep.status = main.status;
  rep.message = main.message;
  res.relaxed = main.traj;
  rep.throughput_relaxed = throughput(res.relaxed, sc, cfg.quad_order);

  res.solution = res.relaxed;
  if (cfg.round_schedule && main.status != RunStatus::Infeasible) {
    const auto t_pol = std::chrono::steady_clock::now();
    std::vector<IterationRecord> pol_records;
    LoopOutcome pol = sca_loop(sc, round_schedule(res.relaxed), cfg, false, rep.polish_trace, pol_records);
    rep.wallclock_polish = seconds_since(t_pol);
    rep.polish_iters = pol.iters;
    res.solution = pol.traj;
    if (pol.status == RunStatus::Infeasible) {
      rep.status = RunStatus::Infeasible;
      rep.message = "polish: " + pol.message;
    } else if (pol.status == RunStatus::MaxIter && rep.status == RunStatus::Converged) {
      rep.status = RunStatus::MaxIter;
      rep.message = "polish: " + pol.message;
    }
  }
  rep.throughput = throughput(res.solution, sc, cfg.quad_order);
  rep.objective = *std::min_element(rep.throughput.begin(), rep.throughput.end());
  rep.audit = audit(res.solution, sc, rep.throughput, cfg.audit_samples);
  return res;
}

ScaResult run(const Scenario& sc, const ScaConfig& cfg) {
  return run_from(sc, initialize(sc, cfg.N >= 0 ? cfg.N : sc.N, true), cfg);
}

ScaResult run_single_uav(const Scenario& sc, const ScaConfig& cfg) {
  Scenario solo = sc;
  solo.P_J = 0.0;
  return run_from(solo, initialize(solo, cfg.N >= 0 ? cfg.N : sc.N, false), cfg);
}

}  // namespace uavsec
