#pragma once

#include "coshf/sca.hpp"
#include "coshf/trajectory.hpp"

namespace uavsec {

/// Time-slotted benchmark: T split into N0 equal slots, one position pair and
/// one scheduling row per slot, rates evaluated at slot midpoints.
struct TdConfig {
  int N0 = 40;
  double eps = 1e-3;
  int max_outer = 100;
  int quad_order = 8;
  double eps_ref = kRefFloor;
  bool round_schedule = true;
  std::size_t audit_samples = kDefaultAuditSamples;
  SolverOptions solver;
};

struct TdResult {
  DiscretePath relaxed;
  DiscretePath path;
  SolveReport report;
};

/// Per-user slot-model throughput: sum_n dt * a_k[n] * secrecy rate at the
/// midpoint of slot n.
std::vector<double> td_model_throughput(const DiscretePath& path, const Scenario& sc);

/// Per-user throughput of the piecewise-linear path, Gauss-Legendre per slot.
std::vector<double> td_throughput(const DiscretePath& path, const Scenario& sc, int quad_order = 8);

/// The co-hover-and-fly initial point sampled at slot boundaries. Throws
/// ScenarioError when V * T cannot cover either UAV's start-to-end distance.
DiscretePath td_initialize(const Scenario& sc, int N0);

TdResult run_td(const Scenario& sc, const TdConfig& cfg = {});
TdResult run_td_from(const Scenario& sc, const DiscretePath& init, const TdConfig& cfg = {});

}  // namespace uavsec
