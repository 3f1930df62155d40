#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace uavsec {

/// Sparse affine form a^T x + b.
struct AffineForm {
  std::vector<int> idx;
  std::vector<double> coef;
  double b = 0.0;

  void add(int i, double c) {
    if (i < 0 || c == 0.0) return;
    idx.push_back(i);
    coef.push_back(c);
  }
  double operator()(const Eigen::VectorXd& x) const {
    double v = b;
    for (std::size_t n = 0; n < idx.size(); ++n) v += coef[n] * x[idx[n]];
    return v;
  }
  bool constant() const { return idx.empty(); }
};

/// Smooth concave g; the constraint is g(x) >= 0. eval() returns NaN outside
/// the domain and otherwise adds the gradient and Hessian into the
/// (pre-zeroed, dense) buffers when they are non-null.
class ConcaveFunction {
 public:
  virtual ~ConcaveFunction() = default;
  virtual double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                      Eigen::MatrixXd* hess) const = 0;
};

/// Why a constraint is convex.
enum class Certificate {
  Affine,           // a^T x + b >= 0
  SecondOrderCone,  // s(x) >= ||v(x)|| with s, v affine
  ConcaveSmooth,    // g(x) >= 0, g concave and C^2 on its domain
};

const char* to_string(Certificate c);

struct Constraint {
  std::string tag;
  Certificate cert = Certificate::Affine;
  AffineForm affine;            // Affine; also the cone's scalar side s(x)
  std::vector<AffineForm> cone; // SecondOrderCone: components of v(x)
  std::shared_ptr<const ConcaveFunction> fn;

  static Constraint make_affine(std::string tag, AffineForm a);
  static Constraint make_cone(std::string tag, AffineForm s, std::vector<AffineForm> v);
  static Constraint make_concave(std::string tag, std::shared_ptr<const ConcaveFunction> fn);

  /// Signed satisfaction: >= 0 feasible. Cones report s - ||v||.
  double residual(const Eigen::VectorXd& x) const;
};

/// maximize c^T x  s.t.  every constraint holds, A_eq x = b_eq.
struct ConvexProblem {
  int n = 0;
  std::vector<std::string> var_names;
  Eigen::VectorXd c;
  std::vector<Constraint> ineq;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;

  int num_constraints() const { return static_cast<int>(ineq.size() + A_eq.rows()); }
  double objective(const Eigen::VectorXd& x) const { return c.dot(x); }

  /// Every inequality is tagged with a certificate; returns offending tags.
  std::vector<std::string> convexity_audit() const;

  /// Variable layout and constraint list with convexity tags.
  std::string dump() const;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };
const char* to_string(SolveStatus s);

struct SolverOptions {
  double kkt_tol = 1e-7;   // relative dual residual and complementarity gap
  double feas_tol = 1e-9;  // primal residual, constraints scaled to unit gradient at the start
  int max_iter = 200;      // interior-point iterations
};

struct SubproblemSolution {
  Eigen::VectorXd x;
  SolveStatus status = SolveStatus::Optimal;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double wallclock = 0.0;
  int newton_steps = 0;  // interior-point iterations
  std::string worst_constraint;  // set on infeasibility
  double worst_residual = 0.0;
};

/// Primal-dual interior-point method (slack form, Mehrotra predictor-corrector,
/// residual line search). The warm start must lie in every constraint's domain
/// but need not be feasible. The returned objective never falls below the warm
/// start's when the warm start is feasible.
SubproblemSolution solve(const ConvexProblem& problem, const Eigen::VectorXd& warm_start,
                         const SolverOptions& opts = {});

}  // namespace uavsec
