#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coshf/scenario.hpp"
#include "coshf/trajectory.hpp"

namespace uavsec {

/// Dense-time feasibility and throughput recomputation of a finished solution.
/// The timeline is rebuilt here from raw waypoints; only the channel formulas
/// are shared with the optimizer.
struct Audit {
  std::size_t samples = 0;
  double max_speed = 0.0;               // m/s, finite-difference estimate
  double max_speed_violation = 0.0;     // max(0, max_speed - V)
  double worst_speed_time = 0.0;
  double min_pair_distance = 0.0;       // m
  double worst_distance_time = 0.0;
  double mission_time = 0.0;            // s
  double time_budget_slack = 0.0;       // T - mission_time
  bool scheduling_binary = false;
  bool scheduling_simplex = false;      // every group sums to 1, entries in [0, 1]
  bool jammer_present = true;
  std::vector<double> throughput_recomputed;  // bits/Hz per user
  double min_throughput = 0.0;
  double max_rel_throughput_gap = 0.0;        // vs the reported values (0 when none given)

  /// Speed <= V + 1e-6, separation >= d_min - 1e-3 (jammer present only),
  /// nonnegative slack within 1e-6 T, simplex scheduling; binary when asked.
  bool feasible(const Scenario& sc, bool require_binary) const;
  std::vector<std::string> violations(const Scenario& sc, bool require_binary) const;
};

inline constexpr std::size_t kDefaultAuditSamples = 10000;

Audit audit(const CoShfTrajectory& traj, const Scenario& sc, const std::vector<double>& reported = {},
            std::size_t samples = kDefaultAuditSamples);

/// Positions are linearly interpolated between consecutive samples; interval m
/// uses scheduling row m.
Audit audit(const DiscretePath& path, const Scenario& sc, const std::vector<double>& reported = {},
            std::size_t samples = kDefaultAuditSamples);

}  // namespace uavsec
