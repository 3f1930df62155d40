#include "coshf/convexify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace uavsec {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Layout

Layout make_layout(int K, int N, bool jammer_vars, bool sched_vars) {
  Layout L;
  L.K = K;
  L.N = N;
  L.jammer_vars = jammer_vars;
  L.sched_vars = sched_vars;
  int o = 0;
  L.off_hS = o;
  o += 2 * K;
  L.off_hJ = o;
  if (jammer_vars) o += 2 * K;
  L.off_tS = o;
  o += 2 * N * (K + 1);
  L.off_tJ = o;
  if (jammer_vars) o += 2 * N * (K + 1);
  L.off_t = o;
  o += K;
  L.off_ah = o;
  if (sched_vars) o += K * K;
  L.off_af = o;
  if (sched_vars) o += K * (K + 1) * (N + 1);
  L.n = o + 1;
  return L;
}

int Layout::point(Uav u, int i, int j) const {
  if (u == Uav::J && !jammer_vars) return -1;
  if (j == 0) {
    if (i < 1 || i > K) return -1;
    return (u == Uav::S ? off_hS : off_hJ) + 2 * (i - 1);
  }
  return (u == Uav::S ? off_tS : off_tJ) + 2 * (i * N + j - 1);
}

int Layout::t(int i) const { return off_t + (i - 1); }

int Layout::a_hover(int i, int k) const { return sched_vars ? off_ah + (i - 1) * K + k : -1; }

int Layout::a_fly(int seg, int k) const { return sched_vars ? off_af + seg * K + k : -1; }

std::vector<std::string> Layout::names() const {
  std::vector<std::string> v(static_cast<std::size_t>(n));
  auto put_point = [&](Uav u, int i, int j) {
    const int idx = point(u, i, j);
    if (idx < 0) return;
    const std::string base = std::string(u == Uav::S ? "qS" : "qJ") + "(" + std::to_string(i) + "," +
                             std::to_string(j) + ")";
    v[idx] = base + ".x";
    v[idx + 1] = base + ".y";
  };
  for (Uav u : {Uav::S, Uav::J}) {
    for (int i = 1; i <= K; ++i) put_point(u, i, 0);
    for (int i = 0; i <= K; ++i)
      for (int j = 1; j <= N; ++j) put_point(u, i, j);
  }
  for (int i = 1; i <= K; ++i) v[t(i)] = "t(" + std::to_string(i) + ")";
  if (sched_vars) {
    for (int i = 1; i <= K; ++i)
      for (int k = 0; k < K; ++k)
        v[a_hover(i, k)] = "a_hover(" + std::to_string(i) + "," + std::to_string(k) + ")";
    for (int s = 0; s < (K + 1) * (N + 1); ++s)
      for (int k = 0; k < K; ++k)
        v[a_fly(s, k)] = "a_fly(" + std::to_string(s) + "," + std::to_string(k) + ")";
  }
  v[U()] = "U";
  return v;
}

Eigen::VectorXd Layout::pack(const CoShfTrajectory& tr, double Uval) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  auto put = [&](Uav u, int i, int j) {
    const int idx = point(u, i, j);
    if (idx >= 0) x.segment<2>(idx) = tr.point(u, i, j);
  };
  for (Uav u : {Uav::S, Uav::J}) {
    for (int i = 1; i <= K; ++i) put(u, i, 0);
    for (int i = 0; i <= K; ++i)
      for (int j = 1; j <= N; ++j) put(u, i, j);
  }
  for (int i = 1; i <= K; ++i) x[t(i)] = tr.hover_dur[i - 1];
  if (sched_vars) {
    for (int i = 1; i <= K; ++i)
      for (int k = 0; k < K; ++k) x[a_hover(i, k)] = tr.sched_hover(i - 1, k);
    for (int s = 0; s < (K + 1) * (N + 1); ++s)
      for (int k = 0; k < K; ++k) x[a_fly(s, k)] = tr.sched_fly(s, k);
  }
  x[U()] = Uval;
  return x;
}

void Layout::unpack(const Eigen::VectorXd& x, CoShfTrajectory& tr) const {
  auto get = [&](Uav u, int i, int j) {
    const int idx = point(u, i, j);
    if (idx >= 0) tr.point(u, i, j) = x.segment<2>(idx);
  };
  for (Uav u : {Uav::S, Uav::J}) {
    for (int i = 1; i <= K; ++i) get(u, i, 0);
    for (int i = 0; i <= K; ++i)
      for (int j = 1; j <= N; ++j) get(u, i, j);
  }
  for (int i = 1; i <= K; ++i) tr.hover_dur[i - 1] = x[t(i)];
  if (sched_vars) {
    for (int i = 1; i <= K; ++i)
      for (int k = 0; k < K; ++k) tr.sched_hover(i - 1, k) = x[a_hover(i, k)];
    for (int s = 0; s < (K + 1) * (N + 1); ++s)
      for (int k = 0; k < K; ++k) tr.sched_fly(s, k) = x[a_fly(s, k)];
  }
}

ComplexityCounts complexity_counts(int K, int N) {
  const long long k = K, n = N;
  return {2 * n * k * k + 3 * k * k + 6 * n * k + 6 * k + 2 * n,
          6 * n * k * k + 8 * k * k + 12 * n * k + 13 * k + 6 * n + 3};
}

// ---------------------------------------------------------------------------
// Individual bounds

int judgment_hover(const CoShfTrajectory& ref, int i, int k, const Scenario& sc) {
  return secrecy_gap(ref.hover_S.at(i - 1), ref.hover_J.at(i - 1), k, sc) >= 0.0 ? 1 : 0;
}

double CollisionBound::eval(double z, const Vec2& S0, const Vec2& S1, const Vec2& J0, const Vec2& J1) const {
  const Vec2 r = dq_ref(z);
  const Vec2 d = (1.0 - z) * (S0 - J0) + z * (S1 - J1);
  return 2.0 * r.dot(d) - r.squaredNorm();
}

double CollisionBound::eta() const {
  double m = std::min(dq_ref(0.0).squaredNorm(), dq_ref(1.0).squaredNorm());
  if (vertex_interior) m = std::min(m, dq_ref(z_star).squaredNorm());
  return m;
}

CollisionBound collision_bound(const CoShfTrajectory& ref, int seg) {
  CollisionBound b;
  b.seg = seg;
  const auto [s0, s1] = ref.segment_ends(Uav::S, ref.segment(seg));
  const auto [j0, j1] = ref.segment_ends(Uav::J, ref.segment(seg));
  b.p_ref = s0 - j0;
  b.v_ref = (s1 - j1) - b.p_ref;
  const double vv = b.v_ref.squaredNorm();
  if (vv > 0.0) {
    const double z = -b.p_ref.dot(b.v_ref) / vv;
    b.z_star = std::clamp(z, 0.0, 1.0);
    b.vertex_interior = z > 0.0 && z < 1.0;
  }
  return b;
}

RateBound hover_rate_bound(const CoShfTrajectory& ref, int i, int k, const Scenario& sc) {
  return make_rate_bound(ref.hover_S.at(i - 1), ref.hover_J.at(i - 1), k, sc);
}

Jet HoverTermBound::eval(const Jet& a, const Jet& t, const PointJet& S, const PointJet& J) const {
  if (!rate.judged) return Jet(a.size(), 0.0);
  const Jet h = rate.h(S, J);
  if (std::isnan(h.v)) return h;
  return product_bound(a, t, square(t), t, h, rate.B1, c);
}

Jet HoverTermBound::eval_fixed(double a0, const Jet& t, const PointJet& S, const PointJet& J) const {
  if (!rate.judged || a0 <= 0.0) return Jet(t.size(), 0.0);
  const Jet h = rate.h(S, J);
  if (std::isnan(h.v)) return h;
  return product_bound_fixed_a(a0, t, t, h, rate.B1, t_ref, rate.h_ref(), floor);
}

double HoverTermBound::value(double a, double t, const Vec2& S, const Vec2& J) const {
  return eval(Jet::var(6, 0, a), Jet::var(6, 1, t), PointJet::var(6, 2, S), PointJet::var(6, 4, J)).v;
}

HoverTermBound hover_term_bound(const CoShfTrajectory& ref, int i, int k, const Scenario& sc, double floor) {
  HoverTermBound b;
  b.i = i;
  b.k = k;
  b.rate = hover_rate_bound(ref, i, k, sc);
  b.a_ref = ref.sched_hover(i - 1, k);
  b.t_ref = ref.hover_dur.at(i - 1);
  b.floor = floor;
  b.c = product_constants(b.a_ref, b.t_ref, b.rate.h_ref(), floor);
  return b;
}

int time_selector(const CoShfTrajectory& ref, int seg) {
  const SegmentIndex s = ref.segment(seg);
  const double dS = segment_length(ref, Uav::S, s);
  const double dJ = ref.jammer_active ? segment_length(ref, Uav::J, s) : 0.0;
  if (!ref.jammer_active) return dS < kZeroChord ? -1 : 0;
  if (dS < kZeroChord && dJ < kZeroChord) return -1;
  return dS >= dJ ? 0 : 1;
}

Jet FlyTermBound::h_sum(const PointJet& S0, const PointJet& S1, const PointJet& J0, const PointJet& J1) const {
  Jet out(static_cast<int>(S0.J.cols()), 0.0);
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (!nodes[n].judged) continue;
    const Jet h = nodes[n].h(lerp(S0, S1, z[n]), lerp(J0, J1, z[n]));
    if (std::isnan(h.v)) return h;
    out = out + w[n] * h;
  }
  return out;
}

Jet FlyTermBound::eval(const Jet& a, const PointJet& S0, const PointJet& S1, const PointJet& J0,
                       const PointJet& J1) const {
  if (!active()) return Jet(a.size(), 0.0);
  const Jet H = h_sum(S0, S1, J0, J1);
  if (std::isnan(H.v)) return H;
  const PointJet d = lambda == 0 ? S1 - S0 : J1 - J0;
  const Jet d_up = smooth_norm(d, 1e-6);
  return (1.0 / V) * product_bound(a, d_up, sqnorm(d), lin_norm(d, chord_ref), H, B_sum, c);
}

Jet FlyTermBound::eval_fixed(double a0, const PointJet& S0, const PointJet& S1, const PointJet& J0,
                             const PointJet& J1) const {
  const int n = static_cast<int>(S0.J.cols());
  if (!active() || a0 <= 0.0) return Jet(n, 0.0);
  const Jet H = h_sum(S0, S1, J0, J1);
  if (std::isnan(H.v)) return H;
  const PointJet d = lambda == 0 ? S1 - S0 : J1 - J0;
  return (1.0 / V) * product_bound_fixed_a(a0, smooth_norm(d, 1e-6), lin_norm(d, chord_ref), H, B_sum,
                                           d_ref, H_ref, floor);
}

double FlyTermBound::value(double a, const Vec2& S0, const Vec2& S1, const Vec2& J0, const Vec2& J1) const {
  return eval(Jet::var(9, 0, a), PointJet::var(9, 1, S0), PointJet::var(9, 3, S1), PointJet::var(9, 5, J0),
              PointJet::var(9, 7, J1))
      .v;
}

FlyTermBound fly_term_bound(const CoShfTrajectory& ref, int seg, int k, const Scenario& sc,
                            const QuadratureRule& quad, double floor) {
  FlyTermBound b;
  b.seg = seg;
  b.k = k;
  b.V = sc.V;
  b.z = quad.nodes;
  b.w = quad.weights;
  b.a_ref = ref.sched_fly(seg, k);
  b.lambda = time_selector(ref, seg);
  const SegmentIndex s = ref.segment(seg);
  const auto [s0, s1] = ref.segment_ends(Uav::S, s);
  const auto [j0, j1] = ref.segment_ends(Uav::J, s);
  if (b.lambda < 0) return b;
  b.chord_ref = b.lambda == 0 ? Vec2(s1 - s0) : Vec2(j1 - j0);
  b.d_ref = b.chord_ref.norm();
  for (int n = 0; n < quad.order(); ++n) {
    const double z = quad.nodes[n];
    RateBound r = make_rate_bound(s0 + z * (s1 - s0), j0 + z * (j1 - j0), k, sc);
    if (r.judged) {
      b.B_sum += quad.weights[n] * r.B1;
      b.H_ref += quad.weights[n] * r.h_ref();
    }
    b.nodes.push_back(std::move(r));
  }
  b.floor = floor;
  b.c = product_constants(b.a_ref, b.d_ref, b.H_ref, floor);
  return b;
}

// ---------------------------------------------------------------------------
// Assembly

Vec2 Surrogate::position(const Eigen::VectorXd& x, Uav u, int i, int j) const {
  const int idx = layout.point(u, i, j);
  return idx >= 0 ? Vec2(x.segment<2>(idx)) : ref.point(u, i, j);
}

double Surrogate::user_bound(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                             Eigen::MatrixXd* hess) const {
  const int K = ref.K;
  double total = 0.0;
  for (int i = 1; i <= K; ++i) {
    const HoverTermBound& hb = hover[static_cast<std::size_t>((i - 1) * K + k)];
    if (!hb.active()) continue;
    const int ia = layout.a_hover(i, k);
    const int ip_s = layout.point(Uav::S, i, 0), ip_j = layout.point(Uav::J, i, 0);
    const int map[6] = {ia, layout.t(i), ip_s, ip_s < 0 ? -1 : ip_s + 1, ip_j, ip_j < 0 ? -1 : ip_j + 1};
    const Jet t = Jet::var(6, 1, x[layout.t(i)]);
    const PointJet S = PointJet::var(6, 2, position(x, Uav::S, i, 0));
    const PointJet J = PointJet::var(6, 4, position(x, Uav::J, i, 0));
    const Jet v = ia >= 0 ? hb.eval(Jet::var(6, 0, x[ia]), t, S, J)
                          : hb.eval_fixed(ref.sched_hover(i - 1, k), t, S, J);
    if (std::isnan(v.v)) return kNaN;
    total += v.v;
    scatter(v, map, 1.0, grad, hess);
  }
  for (int s = 0; s < ref.num_segments(); ++s) {
    const FlyTermBound& fb = fly[static_cast<std::size_t>(s * K + k)];
    if (!fb.active()) continue;
    const SegmentIndex sg = ref.segment(s);
    const auto [ni, nj] = ref.next_point(sg);
    const int ia = layout.a_fly(s, k);
    const int p[4] = {layout.point(Uav::S, sg.i, sg.j), layout.point(Uav::S, ni, nj),
                      layout.point(Uav::J, sg.i, sg.j), layout.point(Uav::J, ni, nj)};
    int map[9] = {ia};
    for (int q = 0; q < 4; ++q) {
      map[1 + 2 * q] = p[q];
      map[2 + 2 * q] = p[q] < 0 ? -1 : p[q] + 1;
    }
    const PointJet S0 = PointJet::var(9, 1, position(x, Uav::S, sg.i, sg.j));
    const PointJet S1 = PointJet::var(9, 3, position(x, Uav::S, ni, nj));
    const PointJet J0 = PointJet::var(9, 5, position(x, Uav::J, sg.i, sg.j));
    const PointJet J1 = PointJet::var(9, 7, position(x, Uav::J, ni, nj));
    const Jet v = ia >= 0 ? fb.eval(Jet::var(9, 0, x[ia]), S0, S1, J0, J1)
                          : fb.eval_fixed(ref.sched_fly(s, k), S0, S1, J0, J1);
    if (std::isnan(v.v)) return kNaN;
    total += v.v;
    scatter(v, map, 1.0, grad, hess);
  }
  return total;
}

namespace {

class UserThroughput final : public ConcaveFunction {
 public:
  UserThroughput(std::shared_ptr<const Surrogate> s, int k) : s_(std::move(s)), k_(k) {}
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const override {
    const double u = s_->user_bound(k_, x, grad, hess);
    if (grad) (*grad)[s_->layout.U()] -= 1.0;
    return u - x[s_->layout.U()];
  }

 private:
  std::shared_ptr<const Surrogate> s_;
  int k_;
};

// T - sum t_i - sum_seg chord_sel / V with smoothed chord norms.
class TimeBudget final : public ConcaveFunction {
 public:
  explicit TimeBudget(std::shared_ptr<const Surrogate> s) : s_(std::move(s)) {}
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const override {
    const Surrogate& s = *s_;
    const CoShfTrajectory& ref = s.ref;
    double g = s.sc.T;
    for (int i = 1; i <= ref.K; ++i) {
      g -= x[s.layout.t(i)];
      if (grad) (*grad)[s.layout.t(i)] -= 1.0;
    }
    for (int seg = 0; seg < ref.num_segments(); ++seg) {
      const int lam = s.lambda[static_cast<std::size_t>(seg)];
      const bool use_S = lam != 1;
      const bool use_J = ref.jammer_active && lam != 0;
      for (Uav u : {Uav::S, Uav::J}) {
        if ((u == Uav::S && !use_S) || (u == Uav::J && !use_J)) continue;
        const SegmentIndex sg = ref.segment(seg);
        const auto [ni, nj] = ref.next_point(sg);
        const int p0 = s.layout.point(u, sg.i, sg.j), p1 = s.layout.point(u, ni, nj);
        const int map[4] = {p0, p0 < 0 ? -1 : p0 + 1, p1, p1 < 0 ? -1 : p1 + 1};
        const PointJet a = PointJet::var(4, 0, s.position(x, u, sg.i, sg.j));
        const PointJet b = PointJet::var(4, 2, s.position(x, u, ni, nj));
        const Jet d = smooth_norm(b - a, s.opts.smooth_eps);
        g -= d.v / s.sc.V;
        scatter(d, map, -1.0 / s.sc.V, grad, hess);
      }
    }
    return g;
  }

 private:
  std::shared_ptr<const Surrogate> s_;
};

// Adds coef^T q to an affine form where q is either a variable or pinned.
void add_point(AffineForm& f, const Surrogate& s, Uav u, int i, int j, const Vec2& coef) {
  const int idx = s.layout.point(u, i, j);
  if (idx >= 0) {
    f.add(idx, coef.x());
    f.add(idx + 1, coef.y());
  } else {
    f.b += coef.dot(s.ref.point(u, i, j));
  }
}

struct PointRef {
  int i, j;
};

std::string pt_tag(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

}  // namespace

AssembledProblem assemble(const CoShfTrajectory& ref, const Scenario& sc, const SurrogateOptions& opts) {
  auto sp = std::make_shared<Surrogate>();
  Surrogate& s = *sp;
  s.sc = sc;
  s.ref = ref;
  s.opts = opts;
  s.quad = gauss_legendre01(opts.quad_order);
  s.layout = make_layout(ref.K, ref.N, ref.jammer_active, opts.sched_vars);
  const int K = ref.K;
  const int nseg = ref.num_segments();

  s.J_hover = Eigen::MatrixXi::Zero(K, K);
  for (int i = 1; i <= K; ++i)
    for (int k = 0; k < K; ++k) {
      s.hover.push_back(hover_term_bound(ref, i, k, sc, opts.ref_floor));
      s.J_hover(i - 1, k) = s.hover.back().rate.judged ? 1 : 0;
    }
  for (int seg = 0; seg < nseg; ++seg) {
    s.lambda.push_back(time_selector(ref, seg));
    Eigen::MatrixXi Jf = Eigen::MatrixXi::Zero(K, s.quad.order());
    for (int k = 0; k < K; ++k) {
      s.fly.push_back(fly_term_bound(ref, seg, k, sc, s.quad, opts.ref_floor));
      for (std::size_t n = 0; n < s.fly.back().nodes.size(); ++n)
        Jf(k, static_cast<int>(n)) = s.fly.back().nodes[n].judged ? 1 : 0;
    }
    s.J_fly.push_back(Jf);
    if (ref.jammer_active) s.collision.push_back(collision_bound(ref, seg));
  }

  const Layout& L = s.layout;
  AssembledProblem out;
  ConvexProblem& P = out.problem;
  P.n = L.n;
  P.var_names = L.names();
  P.c = Eigen::VectorXd::Zero(L.n);
  P.c[L.U()] = 1.0;

  for (int i = 1; i <= K; ++i) {
    AffineForm f;
    f.add(L.t(i), 1.0);
    P.ineq.push_back(Constraint::make_affine("hover_nonneg" + pt_tag(i, 0), f));
  }
  if (L.sched_vars) {
    const int rows = K + nseg;
    P.A_eq = Eigen::MatrixXd::Zero(rows, L.n);
    P.b_eq = Eigen::VectorXd::Ones(rows);
    for (int i = 1; i <= K; ++i)
      for (int k = 0; k < K; ++k) {
        P.A_eq(i - 1, L.a_hover(i, k)) = 1.0;
        AffineForm f;
        f.add(L.a_hover(i, k), 1.0);
        P.ineq.push_back(Constraint::make_affine("sched_hover_nonneg" + pt_tag(i, k), f));
      }
    for (int seg = 0; seg < nseg; ++seg)
      for (int k = 0; k < K; ++k) {
        P.A_eq(K + seg, L.a_fly(seg, k)) = 1.0;
        AffineForm f;
        f.add(L.a_fly(seg, k), 1.0);
        P.ineq.push_back(Constraint::make_affine("sched_fly_nonneg" + pt_tag(seg, k), f));
      }
  }

  // Free points: hover pairs and turning points.
  std::vector<PointRef> free_pts;
  for (int i = 1; i <= K; ++i) free_pts.push_back({i, 0});
  for (int i = 0; i <= K; ++i)
    for (int j = 1; j <= ref.N; ++j) free_pts.push_back({i, j});

  // Separation: D >= d_min^2 at free points, interior reference vertices and cuts.
  if (ref.jammer_active) {
    const double d2 = sc.d_min * sc.d_min;
    for (const auto& pt : free_pts) {
      const Vec2 r = ref.point(Uav::S, pt.i, pt.j) - ref.point(Uav::J, pt.i, pt.j);
      AffineForm f;
      add_point(f, s, Uav::S, pt.i, pt.j, 2.0 * r);
      add_point(f, s, Uav::J, pt.i, pt.j, -2.0 * r);
      f.b -= r.squaredNorm() + d2;
      if (!f.constant()) P.ineq.push_back(Constraint::make_affine("collision" + pt_tag(pt.i, pt.j), f));
    }
    std::vector<std::pair<int, double>> samples;
    for (int seg = 0; seg < nseg; ++seg)
      if (s.collision[static_cast<std::size_t>(seg)].vertex_interior)
        samples.emplace_back(seg, s.collision[static_cast<std::size_t>(seg)].z_star);
    for (const auto& c : opts.collision_cuts) samples.push_back(c);
    for (const auto& [seg, z] : samples) {
      const CollisionBound& cb = s.collision[static_cast<std::size_t>(seg)];
      const SegmentIndex sg = ref.segment(seg);
      const auto [ni, nj] = ref.next_point(sg);
      const Vec2 r = cb.dq_ref(z);
      AffineForm f;
      add_point(f, s, Uav::S, sg.i, sg.j, 2.0 * (1.0 - z) * r);
      add_point(f, s, Uav::J, sg.i, sg.j, -2.0 * (1.0 - z) * r);
      add_point(f, s, Uav::S, ni, nj, 2.0 * z * r);
      add_point(f, s, Uav::J, ni, nj, -2.0 * z * r);
      f.b -= r.squaredNorm() + d2;
      std::ostringstream tag;
      tag << "collision_seg(" << seg << ",z=" << z << ")";
      if (!f.constant()) P.ineq.push_back(Constraint::make_affine(tag.str(), f));
    }
  }

  // Linearized squared horizontal distances stay nonnegative: jammer to each
  // user, transmitter to the eavesdropper.
  auto kappa = [&](Uav u, const Vec2& w, const std::string& name) {
    for (const auto& pt : free_pts) {
      if (L.point(u, pt.i, pt.j) < 0) continue;
      const Vec2 r = ref.point(u, pt.i, pt.j) - w;
      if (r.squaredNorm() == 0.0) continue;
      AffineForm f;
      add_point(f, s, u, pt.i, pt.j, 2.0 * r);
      f.b += -2.0 * r.dot(w) - r.squaredNorm();
      P.ineq.push_back(Constraint::make_affine(name + pt_tag(pt.i, pt.j), f));
    }
    for (int seg = 0; seg < nseg; ++seg) {
      const SegmentIndex sg = ref.segment(seg);
      const auto [ni, nj] = ref.next_point(sg);
      if (L.point(u, sg.i, sg.j) < 0 && L.point(u, ni, nj) < 0) continue;
      const auto [q0, q1] = ref.segment_ends(u, sg);
      const Vec2 v = q1 - q0;
      const double vv = v.squaredNorm();
      if (vv == 0.0) continue;
      const double z = -(q0 - w).dot(v) / vv;
      if (!(z > 0.0 && z < 1.0)) continue;
      const Vec2 r = q0 + z * v - w;
      if (r.squaredNorm() == 0.0) continue;
      AffineForm f;
      add_point(f, s, u, sg.i, sg.j, 2.0 * (1.0 - z) * r);
      add_point(f, s, u, ni, nj, 2.0 * z * r);
      f.b += -2.0 * r.dot(w) - r.squaredNorm();
      std::ostringstream tag;
      tag << name << "_seg(" << seg << ",z=" << z << ")";
      P.ineq.push_back(Constraint::make_affine(tag.str(), f));
    }
  };
  if (ref.jammer_active && sc.P_J > 0.0)
    for (int k = 0; k < K; ++k) kappa(Uav::J, sc.gu_pos[static_cast<std::size_t>(k)], "kappa_J_gu" + std::to_string(k));
  kappa(Uav::S, sc.eve_pos, "kappa_S_eve");

  P.ineq.push_back(Constraint::make_concave("time_budget", std::make_shared<TimeBudget>(sp)));

  // The other UAV's chord must not exceed the selected chord's linearization.
  if (ref.jammer_active) {
    for (int seg = 0; seg < nseg; ++seg) {
      const int lam = s.lambda[static_cast<std::size_t>(seg)];
      if (lam < 0) continue;
      const Uav sel = lam == 0 ? Uav::S : Uav::J;
      const Uav oth = lam == 0 ? Uav::J : Uav::S;
      const SegmentIndex sg = ref.segment(seg);
      const auto [ni, nj] = ref.next_point(sg);
      const auto [r0, r1] = ref.segment_ends(sel, sg);
      const Vec2 u = (r1 - r0).normalized();
      AffineForm sf;
      add_point(sf, s, sel, ni, nj, u);
      add_point(sf, s, sel, sg.i, sg.j, -u);
      std::vector<AffineForm> v(2);
      for (int c = 0; c < 2; ++c) {
        const Vec2 e = c == 0 ? Vec2(1, 0) : Vec2(0, 1);
        add_point(v[c], s, oth, ni, nj, e);
        add_point(v[c], s, oth, sg.i, sg.j, -e);
      }
      if (sf.constant() && v[0].constant() && v[1].constant()) continue;
      P.ineq.push_back(Constraint::make_cone("chord_order(" + std::to_string(seg) + ")", sf, v));
    }
  }

  for (int k = 0; k < K; ++k)
    P.ineq.push_back(Constraint::make_concave("throughput(" + std::to_string(k) + ")",
                                              std::make_shared<UserThroughput>(sp, k)));

  out.x_ref = L.pack(ref, 0.0);
  s.U_ref.resize(static_cast<std::size_t>(K));
  double umin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    s.U_ref[static_cast<std::size_t>(k)] = s.user_bound(k, out.x_ref, nullptr, nullptr);
    umin = std::min(umin, s.U_ref[static_cast<std::size_t>(k)]);
  }
  out.x_ref[L.U()] = umin;
  out.surrogate = sp;
  return out;
}

}  // namespace uavsec
