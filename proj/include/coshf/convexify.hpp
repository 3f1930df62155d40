#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coshf/bounds.hpp"
#include "coshf/quadrature.hpp"
#include "coshf/subsolver.hpp"
#include "coshf/trajectory.hpp"

namespace uavsec {

/// Decision-vector layout of one convex subproblem:
///   hover S (2K) | hover J (2K) | turning S (2N(K+1)) | turning J (2N(K+1)) |
///   hover durations (K) | hover scheduling (K^2) | flight scheduling (K(K+1)(N+1)) | U.
/// Jammer blocks are absent when the jammer is pinned; scheduling blocks are
/// absent when scheduling is held fixed.
struct Layout {
  int K = 0, N = 0;
  bool jammer_vars = true;
  bool sched_vars = true;
  int n = 0;

  int point(Uav u, int i, int j) const;  // x-coordinate index, -1 when pinned
  int t(int i) const;                    // hover pair i in [1, K]
  int a_hover(int i, int k) const;       // -1 when scheduling is fixed
  int a_fly(int seg, int k) const;
  int U() const { return n - 1; }

  std::vector<std::string> names() const;
  Eigen::VectorXd pack(const CoShfTrajectory& traj, double U) const;
  /// Overwrites the variable parts of `traj` from x.
  void unpack(const Eigen::VectorXd& x, CoShfTrajectory& traj) const;

 private:
  friend Layout make_layout(int K, int N, bool jammer_vars, bool sched_vars);
  int off_hS = 0, off_hJ = 0, off_tS = 0, off_tJ = 0, off_t = 0, off_ah = 0, off_af = 0;
};

Layout make_layout(int K, int N, bool jammer_vars, bool sched_vars);

/// Closed-form variable and constraint counts of the joint subproblem as
/// published for complexity analysis: M_var = 2NK^2+3K^2+6NK+6K+2N,
/// M_con = 6NK^2+8K^2+12NK+13K+6N+3.
struct ComplexityCounts {
  long long m_var = 0, m_con = 0;
};
ComplexityCounts complexity_counts(int K, int N);

/// 1 when the reference secrecy gap at hover pair i for user k is >= 0.
int judgment_hover(const CoShfTrajectory& ref, int i, int k, const Scenario& sc);

/// Affine inner bound of the squared separation on one segment:
/// D(z) = 2 dq_ref(z)^T dq(z) - |dq_ref(z)|^2 <= |dq(z)|^2, tight at the reference.
struct CollisionBound {
  int seg = 0;
  Vec2 p_ref = Vec2::Zero(), v_ref = Vec2::Zero();  // dq_ref(z) = p_ref + z v_ref
  double z_star = 0.0;   // vertex of |dq_ref(z)|^2, clamped to [0, 1]
  bool vertex_interior = false;

  Vec2 dq_ref(double z) const { return p_ref + z * v_ref; }
  double eval(double z, const Vec2& S0, const Vec2& S1, const Vec2& J0, const Vec2& J1) const;
  /// min over {0, 1, z*} of D at the reference (= squared reference separation).
  double eta() const;
};

CollisionBound collision_bound(const CoShfTrajectory& ref, int seg);

/// Point (i, 0) rate bound of hover pair i (1-based) for user k.
RateBound hover_rate_bound(const CoShfTrajectory& ref, int i, int k, const Scenario& sc);

/// Concave minorant of a * t * [R_k - R_e]^+ at hover pair i.
struct HoverTermBound {
  int i = 0, k = 0;
  RateBound rate;
  ProductConstants c;
  double a_ref = 0.0, t_ref = 0.0, floor = kRefFloor;

  bool active() const { return rate.judged; }
  Jet eval(const Jet& a, const Jet& t, const PointJet& S, const PointJet& J) const;
  Jet eval_fixed(double a0, const Jet& t, const PointJet& S, const PointJet& J) const;
  double value(double a, double t, const Vec2& S, const Vec2& J) const;
};

HoverTermBound hover_term_bound(const CoShfTrajectory& ref, int i, int k, const Scenario& sc,
                                double floor = kRefFloor);

/// Concave minorant of a * (chord/V) * sum_n w_n [R_k - R_e]^+(z_n) on one segment.
struct FlyTermBound {
  int seg = 0, k = 0;
  double V = 1.0;
  int lambda = 0;               // 0: S chord sets the time, 1: J chord, -1: degenerate
  Vec2 chord_ref = Vec2::Zero();
  double d_ref = 0.0;
  std::vector<double> z, w;     // quadrature nodes and weights
  std::vector<RateBound> nodes;
  double B_sum = 0.0, H_ref = 0.0;  // sum_n w_n J_n B1_n, sum_n w_n J_n h_n(ref)
  double a_ref = 0.0, floor = kRefFloor;
  ProductConstants c;

  bool active() const { return lambda >= 0 && B_sum > 0.0; }
  /// Sum over nodes of w_n J_n h_n at the given endpoint positions.
  Jet h_sum(const PointJet& S0, const PointJet& S1, const PointJet& J0, const PointJet& J1) const;
  Jet eval(const Jet& a, const PointJet& S0, const PointJet& S1, const PointJet& J0,
           const PointJet& J1) const;
  Jet eval_fixed(double a0, const PointJet& S0, const PointJet& S1, const PointJet& J0,
                 const PointJet& J1) const;
  double value(double a, const Vec2& S0, const Vec2& S1, const Vec2& J0, const Vec2& J1) const;
};

FlyTermBound fly_term_bound(const CoShfTrajectory& ref, int seg, int k, const Scenario& sc,
                            const QuadratureRule& quad, double floor = kRefFloor);

/// Index of the UAV whose reference chord sets the segment time (ties to S),
/// -1 when both chords are below kZeroChord.
int time_selector(const CoShfTrajectory& ref, int seg);

struct SurrogateOptions {
  int quad_order = 8;
  bool sched_vars = true;          // false: scheduling held at the reference
  double smooth_eps = 1e-4;        // m, smoothing of chord norms in the time budget
  double ref_floor = kRefFloor;    // floor on reference divisors (a, t, h, 1-a)
  std::vector<std::pair<int, double>> collision_cuts;  // extra (segment, z) samples
};

struct Surrogate {
  Scenario sc;
  CoShfTrajectory ref;
  Layout layout;
  SurrogateOptions opts;
  QuadratureRule quad;
  Eigen::MatrixXi J_hover;             // K x K
  std::vector<Eigen::MatrixXi> J_fly;  // per segment, K x nodes
  std::vector<int> lambda;             // per segment
  std::vector<CollisionBound> collision;
  std::vector<HoverTermBound> hover;   // (i-1)*K + k
  std::vector<FlyTermBound> fly;       // seg*K + k
  std::vector<double> U_ref;           // per-user surrogate at the reference

  Vec2 position(const Eigen::VectorXd& x, Uav u, int i, int j) const;
  /// Surrogate throughput of user k at x (NaN outside the domain).
  double user_bound(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const;
};

struct AssembledProblem {
  std::shared_ptr<const Surrogate> surrogate;
  ConvexProblem problem;
  Eigen::VectorXd x_ref;  // reference packed with U = min_k U_ref
};

/// Builds the convex inner approximation of the joint problem around `ref`.
AssembledProblem assemble(const CoShfTrajectory& ref, const Scenario& sc, const SurrogateOptions& opts = {});

}  // namespace uavsec
