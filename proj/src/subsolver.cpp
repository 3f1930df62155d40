#include "coshf/subsolver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace uavsec {

const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::Affine: return "affine";
    case Certificate::SecondOrderCone: return "soc";
    case Certificate::ConcaveSmooth: return "concave";
  }
  return "?";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

Constraint Constraint::make_affine(std::string tag, AffineForm a) {
  Constraint c;
  c.tag = std::move(tag);
  c.cert = Certificate::Affine;
  c.affine = std::move(a);
  return c;
}

Constraint Constraint::make_cone(std::string tag, AffineForm s, std::vector<AffineForm> v) {
  Constraint c;
  c.tag = std::move(tag);
  c.cert = Certificate::SecondOrderCone;
  c.affine = std::move(s);
  c.cone = std::move(v);
  return c;
}

Constraint Constraint::make_concave(std::string tag, std::shared_ptr<const ConcaveFunction> fn) {
  Constraint c;
  c.tag = std::move(tag);
  c.cert = Certificate::ConcaveSmooth;
  c.fn = std::move(fn);
  return c;
}

double Constraint::residual(const Eigen::VectorXd& x) const {
  switch (cert) {
    case Certificate::Affine: return affine(x);
    case Certificate::SecondOrderCone: {
      double v2 = 0.0;
      for (const auto& f : cone) v2 += std::pow(f(x), 2);
      return affine(x) - std::sqrt(v2);
    }
    case Certificate::ConcaveSmooth: return fn->eval(x, nullptr, nullptr);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::string> ConvexProblem::convexity_audit() const {
  std::vector<std::string> bad;
  for (const auto& c : ineq) {
    const bool ok = (c.cert == Certificate::Affine && c.cone.empty() && !c.fn) ||
                    (c.cert == Certificate::SecondOrderCone && !c.cone.empty() && !c.fn) ||
                    (c.cert == Certificate::ConcaveSmooth && c.fn);
    if (!ok) bad.push_back(c.tag);
  }
  return bad;
}

std::string ConvexProblem::dump() const {
  std::ostringstream os;
  os << "variables " << n << "\n";
  for (int i = 0; i < n; ++i)
    os << "  x[" << i << "] " << (i < static_cast<int>(var_names.size()) ? var_names[i] : "") << "\n";
  os << "inequalities " << ineq.size() << "\n";
  for (const auto& c : ineq) os << "  [" << to_string(c.cert) << "] " << c.tag << "\n";
  os << "equalities " << A_eq.rows() << "\n";
  return os.str();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void add_form(const AffineForm& f, double w, Eigen::MatrixXd& G, int row) {
  for (std::size_t n = 0; n < f.idx.size(); ++n) G(row, f.idx[n]) += w * f.coef[n];
}

void add_outer(Eigen::MatrixXd& H, const AffineForm& a, const AffineForm& b, double w) {
  for (std::size_t i = 0; i < a.idx.size(); ++i)
    for (std::size_t j = 0; j < b.idx.size(); ++j) H(a.idx[i], b.idx[j]) += w * a.coef[i] * b.coef[j];
}

// Values, Jacobian and weighted curvature of all inequalities, each row
// multiplied by a fixed positive scale. Cones are handled in the smooth form
// s - |v|^2 / s >= 0 on s > 0.
class Evaluator {
 public:
  explicit Evaluator(const ConvexProblem& p)
      : p_(p), m_(static_cast<int>(p.ineq.size())), scale_(Eigen::VectorXd::Ones(m_)) {
    for (const auto& c : p.ineq)
      if (c.cert == Certificate::ConcaveSmooth) {
        gbuf_ = Eigen::VectorXd::Zero(p.n);
        hbuf_ = Eigen::MatrixXd::Zero(p.n, p.n);
        break;
      }
  }

  int m() const { return m_; }
  const Eigen::VectorXd& scale() const { return scale_; }

  // Rows scaled to unit gradient norm at x (clamped to a sane range).
  void set_scale(const Eigen::MatrixXd& G) {
    for (int i = 0; i < m_; ++i) {
      const double nrm = G.row(i).norm();
      scale_[i] = nrm > 0.0 ? std::clamp(1.0 / nrm, 1e-6, 1e6) : 1.0;
    }
  }

  // False when x leaves some constraint's domain. H (if given) receives
  // sum_i w_i * (-Hessian of scaled g_i), which is PSD for w >= 0.
  bool eval(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd* G, const Eigen::VectorXd* w,
            Eigen::MatrixXd* H) {
    const int n = p_.n;
    g.resize(m_);
    if (G) G->setZero(m_, n);
    if (H) H->setZero(n, n);
    for (int i = 0; i < m_; ++i) {
      const Constraint& c = p_.ineq[static_cast<std::size_t>(i)];
      const double sc = scale_[i];
      switch (c.cert) {
        case Certificate::Affine:
          g[i] = sc * c.affine(x);
          if (G) add_form(c.affine, sc, *G, i);
          break;
        case Certificate::SecondOrderCone: {
          const double s = c.affine(x);
          if (!(s > 0.0)) return false;
          double v2 = 0.0;
          std::vector<double> v(c.cone.size());
          for (std::size_t j = 0; j < c.cone.size(); ++j) {
            v[j] = c.cone[j](x);
            v2 += v[j] * v[j];
          }
          g[i] = sc * (s - v2 / s);
          if (G) {
            add_form(c.affine, sc * (1.0 + v2 / (s * s)), *G, i);
            for (std::size_t j = 0; j < c.cone.size(); ++j) add_form(c.cone[j], -sc * 2.0 * v[j] / s, *G, i);
          }
          if (H && w) {
            const double ww = (*w)[i] * sc;
            add_outer(*H, c.affine, c.affine, ww * 2.0 * v2 / (s * s * s));
            for (std::size_t j = 0; j < c.cone.size(); ++j) {
              const double cross = -ww * 2.0 * v[j] / (s * s);
              add_outer(*H, c.affine, c.cone[j], cross);
              add_outer(*H, c.cone[j], c.affine, cross);
              add_outer(*H, c.cone[j], c.cone[j], ww * 2.0 / s);
            }
          }
          break;
        }
        case Certificate::ConcaveSmooth: {
          double val;
          if (G) {
            gbuf_.setZero();
            const bool want_h = H && w && (*w)[i] != 0.0;
            if (want_h) hbuf_.setZero();
            val = c.fn->eval(x, &gbuf_, want_h ? &hbuf_ : nullptr);
            if (!std::isfinite(val)) return false;
            G->row(i) = sc * gbuf_.transpose();
            if (want_h) *H -= ((*w)[i] * sc) * hbuf_;
          } else {
            val = c.fn->eval(x, nullptr, nullptr);
            if (!std::isfinite(val)) return false;
          }
          g[i] = sc * val;
          break;
        }
      }
    }
    return true;
  }

 private:
  const ConvexProblem& p_;
  int m_;
  Eigen::VectorXd scale_;
  Eigen::VectorXd gbuf_;
  Eigen::MatrixXd hbuf_;
};

// Reduced Newton system (H + G^T diag(sigma) G) dx + A^T dnu = r1, A dx = r2.
class KktSolver {
 public:
  bool factor(Eigen::MatrixXd M, const Eigen::MatrixXd& A) {
    const double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    double delta = 1e-14 * scale;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::MatrixXd Mr = M;
      Mr.diagonal().array() += delta;
      llt_.compute(Mr);
      if (llt_.info() == Eigen::Success) {
        A_ = A;
        if (A.rows() > 0) {
          MiAt_ = llt_.solve(A.transpose());
          schur_.compute(A * MiAt_);
        }
        return true;
      }
      delta *= 100.0;
    }
    return false;
  }

  void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dx, Eigen::VectorXd& dnu) const {
    const Eigen::VectorXd y = llt_.solve(r1);
    if (A_.rows() > 0) {
      dnu = schur_.solve(A_ * y - r2);
      dx = y - MiAt_ * dnu;
    } else {
      dnu.resize(0);
      dx = y;
    }
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::LDLT<Eigen::MatrixXd> schur_;
  Eigen::MatrixXd A_, MiAt_;
};

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

double min_residual(const ConvexProblem& p, const Eigen::VectorXd& x, std::string* tag) {
  double worst = kInf;
  for (const auto& c : p.ineq) {
    double r = c.residual(x);
    if (std::isnan(r)) r = -kInf;
    if (r < worst) {
      worst = r;
      if (tag) *tag = c.tag;
    }
  }
  return worst;
}

}  // namespace

SubproblemSolution solve(const ConvexProblem& p, const Eigen::VectorXd& warm_start, const SolverOptions& opts) {
  const auto t_begin = std::chrono::steady_clock::now();
  SubproblemSolution out;
  const int n = p.n;
  const Eigen::MatrixXd A = p.A_eq.rows() > 0 ? p.A_eq : Eigen::MatrixXd(0, n);
  const Eigen::VectorXd b = p.A_eq.rows() > 0 ? p.b_eq : Eigen::VectorXd(0);
  auto finish = [&]() {
    out.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return out;
  };

  const double obj0 = p.objective(warm_start);
  const bool warm_feasible = min_residual(p, warm_start, nullptr) >= 0.0 &&
                             (A.rows() == 0 || (A * warm_start - b).lpNorm<Eigen::Infinity>() <= 1e-9);

  Eigen::VectorXd x = warm_start;
  if (A.rows() > 0) {
    const Eigen::VectorXd r = A * x - b;
    if (r.lpNorm<Eigen::Infinity>() > 0.0) x -= A.transpose() * (A * A.transpose()).ldlt().solve(r);
  }

  Evaluator ev(p);
  const int m = ev.m();
  Eigen::VectorXd g;
  Eigen::MatrixXd G, H;
  if (!ev.eval(x, g, &G, nullptr, nullptr)) {
    out.x = warm_start;
    out.status = SolveStatus::Infeasible;
    out.objective = obj0;
    out.worst_residual = min_residual(p, warm_start, &out.worst_constraint);
    return finish();
  }
  ev.set_scale(G);
  ev.eval(x, g, &G, nullptr, nullptr);

  Eigen::VectorXd s = g.cwiseMax(1e-3);
  Eigen::VectorXd lam = (1e-2 * s.cwiseInverse()).cwiseMin(1e2);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(A.rows());
  const double c_norm = 1.0 + p.c.lpNorm<Eigen::Infinity>();

  bool converged = false;
  double kkt = kInf;
  KktSolver kkt_solver;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    ev.eval(x, g, &G, &lam, &H);
    const Eigen::VectorXd r_d = -p.c - G.transpose() * lam + A.transpose() * nu;
    const Eigen::VectorXd r_p = g - s;
    const Eigen::VectorXd r_e = A * x - b;
    const double mu = m > 0 ? s.dot(lam) / m : 0.0;
    // A slack mismatch on a constraint far from active is harmless; what must
    // vanish is actual violation and the complementarity of lam with g.
    const double gap = s.dot(lam) + std::abs(lam.dot(r_p));
    // Dual residual relative to the largest term it balances: cancellation in
    // G^T lam sets a floor well above machine precision.
    const Eigen::VectorXd Gl = G.transpose() * lam;
    const double rd = r_d.lpNorm<Eigen::Infinity>() /
                      std::max({c_norm, Gl.lpNorm<Eigen::Infinity>(),
                                A.rows() > 0 ? (A.transpose() * nu).lpNorm<Eigen::Infinity>() : 0.0});
    const double rp = std::max(m > 0 ? (-g).cwiseMax(0.0).maxCoeff() : 0.0,
                               A.rows() > 0 ? r_e.lpNorm<Eigen::Infinity>() : 0.0);
    const double rel_gap = gap / std::max(1.0, std::abs(p.objective(x)));
    kkt = std::max(rd, rel_gap);
    if (rd <= opts.kkt_tol && rel_gap <= opts.kkt_tol && rp <= opts.feas_tol) {
      converged = true;
      break;
    }

    const Eigen::VectorXd sigma = lam.cwiseQuotient(s);
    Eigen::MatrixXd M = H;
    M.noalias() += G.transpose() * sigma.asDiagonal() * G;
    if (!kkt_solver.factor(std::move(M), A)) break;

    // Direction for complementarity target tau (componentwise lam*s -> tau).
    auto direction = [&](const Eigen::VectorXd& tau, Eigen::VectorXd& dx, Eigen::VectorXd& dnu, Eigen::VectorXd& ds,
                         Eigen::VectorXd& dl) {
      const Eigen::VectorXd comp = (lam.cwiseProduct(s) - tau).cwiseQuotient(s);
      const Eigen::VectorXd r1 = -r_d - G.transpose() * (comp + sigma.cwiseProduct(r_p));
      kkt_solver.solve(r1, -r_e, dx, dnu);
      ds = G * dx + r_p;
      dl = -comp - sigma.cwiseProduct(ds);
    };

    Eigen::VectorXd dx, dnu, ds, dl;
    direction(Eigen::VectorXd::Zero(m), dx, dnu, ds, dl);
    const double a_aff = std::min({1.0, max_step(s, ds), max_step(lam, dl)});
    const double mu_aff = m > 0 ? (s + a_aff * ds).dot(lam + a_aff * dl) / m : 0.0;
    const double sig = mu > 0.0 ? std::clamp(std::pow(mu_aff / mu, 3), 0.0, 1.0) : 0.0;
    // Never aim below what the stopping test needs; pushing mu further only
    // degrades conditioning.
    const double mu_floor = 0.1 * opts.kkt_tol * std::max(1.0, std::abs(p.objective(x))) / std::max(m, 1);
    const Eigen::VectorXd tau = Eigen::VectorXd::Constant(m, std::max(sig * mu, mu_floor)) - ds.cwiseProduct(dl);
    direction(tau, dx, dnu, ds, dl);

    double alpha = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(lam, dl)));
    // Without a merit function, the linearized step can throw a weakly curved
    // constraint far out of range; keep the slack mismatch from blowing up.
    const double rp_old = m > 0 ? r_p.lpNorm<Eigen::Infinity>() : 0.0;
    Eigen::VectorXd g_try;
    bool ok = false;
    for (int k = 0; k < 60; ++k) {
      if (ev.eval(x + alpha * dx, g_try, nullptr, nullptr, nullptr) &&
          (m == 0 || (g_try - s - alpha * ds).lpNorm<Eigen::Infinity>() <=
                         std::max(2.0 * rp_old, 0.1 * (1.0 + (s + alpha * ds).lpNorm<Eigen::Infinity>())))) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) break;
    x += alpha * dx;
    s += alpha * ds;
    lam += alpha * dl;
    nu += alpha * dnu;
  }
  out.newton_steps = it;
  out.kkt_residual = kkt;
  out.x = x;
  out.objective = p.objective(x);

  // Feasibility of the final point in the caller's (unscaled) units.
  std::string tag;
  const double worst = min_residual(p, x, &tag);
  const double eq = A.rows() > 0 ? (A * x - b).lpNorm<Eigen::Infinity>() : 0.0;
  const bool x_feasible = worst >= -opts.feas_tol * 1e3 && eq <= 1e-9;
  if (converged && x_feasible) {
    out.status = SolveStatus::Optimal;
  } else if (x_feasible) {
    out.status = SolveStatus::MaxIter;
  } else {
    out.status = warm_feasible ? SolveStatus::MaxIter : SolveStatus::Infeasible;
    out.worst_constraint = tag;
    out.worst_residual = worst;
    out.x = warm_start;
    out.objective = obj0;
  }
  if (warm_feasible && out.objective < obj0 - 1e-9) {
    out.x = warm_start;
    out.objective = obj0;
  }
  return finish();
}

}  // namespace uavsec
