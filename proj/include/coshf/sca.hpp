#pragma once

#include <string>
#include <vector>

#include "coshf/audit.hpp"
#include "coshf/bounds.hpp"
#include "coshf/subsolver.hpp"
#include "coshf/trajectory.hpp"

namespace uavsec {

struct ScaConfig {
  double eps = 1e-3;        // bits/Hz, stop when |objective change| < eps
  int max_outer = 100;
  int quad_order = 8;
  double eps_ref = kRefFloor;
  bool round_schedule = true;
  int N = -1;               // turning points per leg; -1 takes the scenario's
  int collision_rounds = 3; // extra cut rounds when a candidate violates separation
  std::size_t audit_samples = kDefaultAuditSamples;
  SolverOptions solver;
};

enum class RunStatus { Converged, MaxIter, Infeasible };
const char* to_string(RunStatus s);

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;   // true min throughput of the accepted iterate
  double surrogate = 0.0;   // subproblem optimum
  double kkt_residual = 0.0;
  double wallclock = 0.0;
  int newton_steps = 0;
  bool accepted = true;
};

struct SolveReport {
  RunStatus status = RunStatus::Converged;
  std::string message;
  std::vector<double> objective_trace;  // main phase, starts at the initial point
  std::vector<double> polish_trace;     // after rounding, starts at the rounded point
  std::vector<IterationRecord> iterations;
  int iters = 0;
  int polish_iters = 0;
  double wallclock_main = 0.0;
  double wallclock_polish = 0.0;
  int m_var = 0, m_con = 0;
  std::vector<double> throughput_relaxed;  // per user, before rounding
  std::vector<double> throughput;          // per user, returned solution
  double objective = 0.0;                  // min of `throughput`
  Audit audit;

  bool converged() const { return status == RunStatus::Converged; }
};

struct ScaResult {
  CoShfTrajectory relaxed;   // pre-round
  CoShfTrajectory solution;  // post-round (== relaxed when rounding is off)
  SolveReport report;
};

/// TSP hover order for the transmitter, straight chord for the jammer, equal
/// split of the remaining time, uniform scheduling. Throws ScenarioError when
/// T cannot cover the tour or the separation cannot be repaired.
CoShfTrajectory initialize(const Scenario& sc, int N, bool jammer_active = true);

/// Every scheduling row replaced by its argmax one-hot (ties to the lowest user).
CoShfTrajectory round_schedule(const CoShfTrajectory& traj);

ScaResult run(const Scenario& sc, const ScaConfig& cfg = {});
ScaResult run_from(const Scenario& sc, const CoShfTrajectory& init, const ScaConfig& cfg = {});

/// Transmitter alone: P_J = 0, jammer pinned to its straight chord, no separation constraints.
ScaResult run_single_uav(const Scenario& sc, const ScaConfig& cfg = {});

}  // namespace uavsec
