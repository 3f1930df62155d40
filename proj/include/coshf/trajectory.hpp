#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "coshf/scenario.hpp"

namespace uavsec {

enum class Uav { S, J };

/// Flight segment (i, j): leg i in [0, K], sub-segment j in [0, N]. It runs
/// from point (i, j) to (i, j+1), with (i, N) wrapping to hover point (i+1, 0).
struct SegmentIndex {
  int i = 0;
  int j = 0;
};

/// Chords shorter than this are treated as zero-length segments.
inline constexpr double kZeroChord = 1e-6;

/// Finite-dimensional co-hover-and-fly trajectory of the transmitter (S) and
/// jammer (J). Point (i, j) uses 0-based leg i in [0, K+1]:
///   (0, 0) start, (K+1, 0) end, (i, 0) hover pair i for 1 <= i <= K,
///   (i, j) turning point j in [1, N] of leg i.
struct CoShfTrajectory {
  int K = 0;
  int N = 0;
  Vec2 start_S = Vec2::Zero(), end_S = Vec2::Zero();
  Vec2 start_J = Vec2::Zero(), end_J = Vec2::Zero();
  std::vector<Vec2> hover_S, hover_J;  // K each
  std::vector<Vec2> turn_S, turn_J;    // (K+1)*N each, leg-major
  std::vector<double> hover_dur;       // K
  Eigen::MatrixXd sched_hover;         // K x K, row i-1 = hover pair i
  Eigen::MatrixXd sched_fly;           // (K+1)(N+1) x K, row = flat segment
  bool jammer_active = true;           // false: jammer absent, S alone sets segment time

  /// Zero hover durations, uniform scheduling, all points at the start.
  static CoShfTrajectory blank(const Scenario& sc, int N);

  int num_segments() const { return (K + 1) * (N + 1); }
  int flat(SegmentIndex s) const { return s.i * (N + 1) + s.j; }
  SegmentIndex segment(int flat) const { return {flat / (N + 1), flat % (N + 1)}; }

  const Vec2& point(Uav u, int i, int j) const;
  Vec2& point(Uav u, int i, int j);
  std::pair<int, int> next_point(SegmentIndex s) const;
  std::pair<Vec2, Vec2> segment_ends(Uav u, SegmentIndex s) const;

  bool operator==(const CoShfTrajectory&) const = default;
};

/// Empty when every structural invariant holds within `tol`.
std::vector<std::string> invariant_violations(const CoShfTrajectory& traj, const Scenario& sc,
                                              double tol = 1e-9);

double segment_length(const CoShfTrajectory& traj, Uav u, SegmentIndex seg);

/// max(d_S, d_J) / V; the longer-chord UAV moves at exactly V.
double segment_time(const CoShfTrajectory& traj, SegmentIndex seg, double V);

/// Speed of UAV u during the segment (0 for a zero-duration segment).
double segment_speed(const CoShfTrajectory& traj, Uav u, SegmentIndex seg, double V);

/// Affine interpolation along the segment; z must lie in [0, 1].
Vec2 position_at(const CoShfTrajectory& traj, Uav u, SegmentIndex seg, double z);

/// Hover durations plus all segment times.
double total_time(const CoShfTrajectory& traj, const Scenario& sc);

/// Exact min over z in [0,1] of |q_S(z) - q_J(z)| (vertex of the quadratic, clamped).
double min_pair_distance(const CoShfTrajectory& traj, SegmentIndex seg);

/// Per-user secrecy throughput (bits/Hz): hover terms exactly, flight terms by
/// Gauss-Legendre quadrature of the clamped secrecy rate.
std::vector<double> throughput(const CoShfTrajectory& traj, const Scenario& sc, int quad_order = 8);

double min_throughput(const CoShfTrajectory& traj, const Scenario& sc, int quad_order = 8);

/// Uniformly time-sampled positions and scheduling.
struct DiscretePath {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<Vec2> pos_S, pos_J;
  Eigen::MatrixXd sched;  // samples x K, weights of the interval starting at t[m]

  std::size_t size() const { return t.size(); }
  int active_user(std::size_t m) const;
};

/// Samples at multiples of dt plus a final sample at total_time.
DiscretePath to_discrete(const CoShfTrajectory& traj, const Scenario& sc, double dt);

/// Structured JSON document (hover/turning points, durations, scheduling).
std::string trajectory_to_json(const CoShfTrajectory& traj);
CoShfTrajectory trajectory_from_json(const std::string& text);

}  // namespace uavsec
