#include "coshf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavsec {

Jet operator+(const Jet& a, const Jet& b) {
  Jet r(a.size(), a.v + b.v);
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r(a.size(), a.v - b.v);
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}

Jet operator-(const Jet& a) { return -1.0 * a; }

Jet operator*(double s, const Jet& a) {
  Jet r(a.size(), s * a.v);
  r.g = s * a.g;
  r.h = s * a.h;
  return r;
}

Jet operator+(const Jet& a, double s) {
  Jet r = a;
  r.v += s;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.size(), a.v * b.v);
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}

Jet chain(const Jet& u, double f0, double f1, double f2) {
  Jet r(u.size(), f0);
  r.g = f1 * u.g;
  r.h = f2 * (u.g * u.g.transpose()) + f1 * u.h;
  return r;
}

Jet square(const Jet& u) { return chain(u, u.v * u.v, 2.0 * u.v, 2.0); }
Jet cube(const Jet& u) { return chain(u, u.v * u.v * u.v, 3.0 * u.v * u.v, 6.0 * u.v); }
Jet inverse(const Jet& u) {
  const double i = 1.0 / u.v;
  return chain(u, i, -i * i, 2.0 * i * i * i);
}
Jet inverse_square(const Jet& u) {
  const double i = 1.0 / u.v;
  return chain(u, i * i, -2.0 * i * i * i, 6.0 * i * i * i * i);
}

PointJet operator-(const PointJet& a, const PointJet& b) {
  PointJet r;
  r.v = a.v - b.v;
  r.J = a.J - b.J;
  return r;
}

PointJet lerp(const PointJet& a, const PointJet& b, double z) {
  PointJet r;
  r.v = (1.0 - z) * a.v + z * b.v;
  r.J = (1.0 - z) * a.J + z * b.J;
  return r;
}

Jet sqnorm(const PointJet& p) {
  Jet r(static_cast<int>(p.J.cols()), p.v.squaredNorm());
  r.g = 2.0 * p.J.transpose() * p.v;
  r.h = 2.0 * p.J.transpose() * p.J;
  return r;
}

Jet sqdist(const PointJet& p, const Vec2& w, double alt) {
  PointJet d = p;
  d.v -= w;
  return sqnorm(d) + alt * alt;
}

Jet lin_sqdist(const PointJet& p, const Vec2& p_ref, const Vec2& w, double alt) {
  const Vec2 r = p_ref - w;
  Jet out(static_cast<int>(p.J.cols()), 2.0 * r.dot(p.v - w) - r.squaredNorm() + alt * alt);
  out.g = 2.0 * p.J.transpose() * r;
  return out;
}

Jet smooth_norm(const PointJet& p, double eps) {
  const Jet s = sqnorm(p) + eps * eps;
  const double r = std::sqrt(s.v);
  return chain(s, r, 0.5 / r, -0.25 / (r * s.v));
}

Jet lin_norm(const PointJet& p, const Vec2& p_ref) {
  const Vec2 u = p_ref / p_ref.norm();
  Jet out(static_cast<int>(p.J.cols()), u.dot(p.v));
  out.g = p.J.transpose() * u;
  return out;
}

void scatter(const Jet& j, const int* map, double w, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  const int n = j.size();
  for (int p = 0; p < n; ++p) {
    const int gp = map[p];
    if (gp < 0) continue;
    if (grad) (*grad)[gp] += w * j.g[p];
    if (hess)
      for (int q = 0; q < n; ++q)
        if (map[q] >= 0) (*hess)(gp, map[q]) += w * j.h(p, q);
  }
}

RateBound make_rate_bound(const Vec2& qS_ref, const Vec2& qJ_ref, int k, const Scenario& sc) {
  RateBound b;
  b.k = k;
  b.qS_ref = qS_ref;
  b.qJ_ref = qJ_ref;
  b.w_k = sc.gu_pos.at(static_cast<std::size_t>(k));
  b.w_e = sc.eve_pos;
  b.alt = sc.alt;
  b.gamma_k = snr_hover(qS_ref, qJ_ref, Node::user(k), sc);
  b.gamma_e = snr_hover(qS_ref, qJ_ref, Node::eve(), sc);
  b.gap_ref = std::log2(1.0 + b.gamma_k) - std::log2(1.0 + b.gamma_e);
  b.judged = b.gamma_k > 0.0 && b.gap_ref >= 0.0;
  if (!b.judged) return b;

  const double ln2 = std::log(2.0);
  b.A1 = b.gamma_k * b.gamma_k / (ln2 * (b.gamma_k + 1.0));
  b.A2 = 1.0 / (ln2 * (1.0 + b.gamma_e));
  b.B1 = b.A1 / b.gamma_k + b.A2 * b.gamma_e + b.gap_ref;
  const double dSk = dist2(qS_ref, b.w_k, sc.alt), dJk = dist2(qJ_ref, b.w_k, sc.alt);
  const double dSe = dist2(qS_ref, b.w_e, sc.alt), dJe = dist2(qJ_ref, b.w_e, sc.alt);
  b.F1 = dSk * dJk;
  b.F2 = dSe * dJe;
  const double den = sc.beta0 * sc.P_J + sc.sigma2_eve * dJe;
  b.E1 = sc.beta0 * sc.beta0 * sc.P_S * sc.P_J / (den * den);
  b.E2 = -b.E1 * dJe + sc.beta0 * sc.P_S * dJe / den;
  b.sig_k = sc.sigma2_gu;
  b.beta_PS = sc.beta0 * sc.P_S;
  b.PJ_over_PS = sc.P_J / sc.P_S;
  return b;
}

Jet RateBound::h(const PointJet& qS, const PointJet& qJ) const {
  const int n = static_cast<int>(qS.J.cols());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Jet dSk = sqdist(qS, w_k, alt);
  Jet out = (A1 * sig_k / beta_PS) * dSk;
  if (PJ_over_PS > 0.0) {
    const Jet LJk = lin_sqdist(qJ, qJ_ref, w_k, alt);
    if (!(LJk.v > 0.0)) return Jet(n, nan);
    out = out + (A1 * PJ_over_PS) * ((0.5 * F1) * inverse_square(LJk) + (0.5 / F1) * square(dSk));
  }
  const Jet LSe = lin_sqdist(qS, qS_ref, w_e, alt);
  if (!(LSe.v > 0.0)) return Jet(n, nan);
  if (E1 > 0.0) {
    const Jet dJe = sqdist(qJ, w_e, alt);
    out = out + (A2 * E1) * ((0.5 * F2) * inverse_square(LSe) + (0.5 / F2) * square(dJe));
  }
  return out + (A2 * E2) * inverse(LSe);
}

double RateBound::h(const Vec2& qS, const Vec2& qJ) const {
  return h(PointJet::var(4, 0, qS), PointJet::var(4, 2, qJ)).v;
}

double RateBound::value(const Vec2& qS, const Vec2& qJ) const {
  return judged ? B1 - h(qS, qJ) : 0.0;
}

ProductConstants product_constants(double a_ref, double t_ref, double h_ref, double floor) {
  const double a = std::max(a_ref, floor);
  const double t = std::max(t_ref, floor);
  const double h = std::max(h_ref, floor);
  const double oma = std::max(1.0 - a_ref, floor);
  return {a / t, a / h, oma / t};
}

Jet product_bound(const Jet& a, const Jet& t_up, const Jet& t_sq, const Jet& t_lo, const Jet& h,
                  double B1, const ProductConstants& c) {
  const Jet u = a + c.C1 * t_up + c.C2 * h;
  const Jet oma = -a + 1.0;
  return (-1.0 / (27.0 * c.C1 * c.C2)) * cube(u) + (-B1 / (2.0 * c.F3)) * square(oma) +
         (-0.5 * B1 * c.F3) * t_sq + B1 * t_lo;
}

Jet product_bound_fixed_a(double a0, const Jet& t_up, const Jet& t_lo, const Jet& h, double B1,
                          double t_ref, double h_ref, double floor) {
  const double C = std::max(h_ref, floor) / std::max(t_ref, floor);
  return a0 * (B1 * t_lo - (0.25 / C) * square(C * t_up + h));
}

Jet product_bound_fixed_t(double dt, const Jet& a, const Jet& h, double B1, double a_ref, double h_ref, double floor) {
  const double C = std::max(a_ref, floor) / std::max(h_ref, floor);
  return dt * (B1 * a - (0.25 / C) * square(a + C * h));
}

}  // namespace uavsec
