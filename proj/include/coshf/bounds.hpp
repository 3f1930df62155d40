#pragma once

#include <vector>

#include <Eigen/Core>

#include "coshf/channel.hpp"
#include "coshf/scenario.hpp"

namespace uavsec {

// ---------------------------------------------------------------------------
// Second-order local expansions ("jets") over at most kJetMax local slots.

inline constexpr int kJetMax = 10;
using JetVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kJetMax, 1>;
using JetMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kJetMax, kJetMax>;

struct Jet {
  double v = 0.0;
  JetVec g;
  JetMat h;

  explicit Jet(int n = 0, double value = 0.0) : v(value), g(JetVec::Zero(n)), h(JetMat::Zero(n, n)) {}
  static Jet var(int n, int slot, double value) {
    Jet j(n, value);
    j.g[slot] = 1.0;
    return j;
  }
  int size() const { return static_cast<int>(g.size()); }
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(double s, const Jet& a);
Jet operator+(const Jet& a, double s);
Jet operator*(const Jet& a, const Jet& b);
/// f(u) given f, f', f'' at u.
Jet chain(const Jet& u, double f0, double f1, double f2);
Jet square(const Jet& u);
Jet cube(const Jet& u);
Jet inverse(const Jet& u);
Jet inverse_square(const Jet& u);

/// Affine 2-D point expressed over the local slots.
struct PointJet {
  Vec2 v = Vec2::Zero();
  Eigen::Matrix<double, 2, Eigen::Dynamic, 0, 2, kJetMax> J;

  PointJet() = default;
  PointJet(int n, const Vec2& value) : v(value), J(Eigen::Matrix<double, 2, Eigen::Dynamic, 0, 2, kJetMax>::Zero(2, n)) {}
  static PointJet var(int n, int slot, const Vec2& value) {
    PointJet p(n, value);
    p.J(0, slot) = 1.0;
    p.J(1, slot + 1) = 1.0;
    return p;
  }
};

PointJet operator-(const PointJet& a, const PointJet& b);
PointJet lerp(const PointJet& a, const PointJet& b, double z);

/// |p - w|^2 + alt^2.
Jet sqdist(const PointJet& p, const Vec2& w, double alt);
/// Affine minorant of sqdist at p_ref: 2(p_ref-w)^T(p-w) - |p_ref-w|^2 + alt^2.
Jet lin_sqdist(const PointJet& p, const Vec2& p_ref, const Vec2& w, double alt);
Jet sqnorm(const PointJet& p);
/// sqrt(|p|^2 + eps^2).
Jet smooth_norm(const PointJet& p, double eps);
/// Affine minorant of |p| at p_ref: p_ref^T p / |p_ref|.
Jet lin_norm(const PointJet& p, const Vec2& p_ref);

/// Adds a jet's gradient and Hessian into global buffers via a slot map
/// (negative entries are constants and are dropped).
void scatter(const Jet& j, const int* slot_to_global, double w, Eigen::VectorXd* grad, Eigen::MatrixXd* hess);

// ---------------------------------------------------------------------------
// Concave minorant of R_{S,k} - R_{S,e} around a reference position pair.

struct RateBound {
  int k = 0;
  bool judged = false;  // reference gap >= 0; otherwise the bound is identically 0
  Vec2 qS_ref = Vec2::Zero(), qJ_ref = Vec2::Zero();
  Vec2 w_k = Vec2::Zero(), w_e = Vec2::Zero();
  double alt = 0.0;
  double A1 = 0, A2 = 0, B1 = 0, E1 = 0, E2 = 0, F1 = 0, F2 = 0;
  double sig_k = 0, beta_PS = 0, PJ_over_PS = 0;
  double gamma_k = 0, gamma_e = 0, gap_ref = 0;

  /// Convex majorant h with gap >= B1 - h; h(ref) = B1 - gap_ref.
  Jet h(const PointJet& qS, const PointJet& qJ) const;
  double h(const Vec2& qS, const Vec2& qJ) const;
  /// judged * (B1 - h).
  double value(const Vec2& qS, const Vec2& qJ) const;
  double h_ref() const { return B1 - gap_ref; }
};

RateBound make_rate_bound(const Vec2& qS_ref, const Vec2& qJ_ref, int k, const Scenario& sc);

/// Floor applied to reference quantities that appear as divisors.
inline constexpr double kRefFloor = 1e-4;

/// Lower bound of a * t * (B1 - h) jointly concave in (a, t, q):
///   -(a + C1 t + C2 h)^3/(27 C1 C2) - B1/(2 F3)(1-a)^2 - B1 F3 t^2/2 + B1 t.
struct ProductConstants {
  double C1 = 0, C2 = 0, F3 = 0;
};
ProductConstants product_constants(double a_ref, double t_ref, double h_ref, double floor = kRefFloor);
/// t enters through an upper bound (cube), its square and a lower bound
/// (linear term); for a hover duration all three are t itself.
Jet product_bound(const Jet& a, const Jet& t_up, const Jet& t_sq, const Jet& t_lo, const Jet& h,
                  double B1, const ProductConstants& c);

/// a0 * t * (B1 - h) >= a0 (B1 t_lo - (C t_up + h)^2/(4C)), C = h_ref/t_ref (a fixed).
Jet product_bound_fixed_a(double a0, const Jet& t_up, const Jet& t_lo, const Jet& h, double B1,
                          double t_ref, double h_ref, double floor = kRefFloor);

/// dt * a * (B1 - h) >= dt (B1 a - (a + C h)^2/(4C)), C = a_ref/h_ref (t fixed).
Jet product_bound_fixed_t(double dt, const Jet& a, const Jet& h, double B1, double a_ref, double h_ref,
                           double floor = kRefFloor);

}  // namespace uavsec
