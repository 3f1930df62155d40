#include "coshf/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coshf/channel.hpp"

namespace uavsec {

namespace {

// One constant-velocity stretch of the mission.
struct Piece {
  double t0 = 0.0, dur = 0.0;
  Vec2 S0, S1, J0, J1;
  Eigen::VectorXd sched;
};

struct Timeline {
  std::vector<Piece> pieces;
  double total = 0.0;
  bool jammer = true;

  void push(Piece p) {
    p.t0 = total;
    total += p.dur;
    pieces.push_back(std::move(p));
  }

  // Piece index and local fraction at absolute time t.
  std::pair<std::size_t, double> locate(double t) const {
    auto it = std::upper_bound(pieces.begin(), pieces.end(), t,
                               [](double v, const Piece& p) { return v < p.t0 + p.dur; });
    if (it == pieces.end()) return {pieces.size() - 1, 1.0};
    const Piece& p = *it;
    const double z = p.dur > 0.0 ? std::clamp((t - p.t0) / p.dur, 0.0, 1.0) : 0.0;
    return {static_cast<std::size_t>(it - pieces.begin()), z};
  }

  std::pair<Vec2, Vec2> at(double t) const {
    const auto [i, z] = locate(t);
    const Piece& p = pieces[i];
    return {p.S0 + z * (p.S1 - p.S0), p.J0 + z * (p.J1 - p.J0)};
  }
};

Timeline build(const CoShfTrajectory& tr, const Scenario& sc) {
  auto pt = [&](bool s, int i, int j) -> Vec2 {
    if (j == 0) {
      if (i == 0) return s ? tr.start_S : tr.start_J;
      if (i == tr.K + 1) return s ? tr.end_S : tr.end_J;
      return s ? tr.hover_S[i - 1] : tr.hover_J[i - 1];
    }
    return s ? tr.turn_S[i * tr.N + j - 1] : tr.turn_J[i * tr.N + j - 1];
  };
  Timeline tl;
  tl.jammer = tr.jammer_active;
  for (int i = 0; i <= tr.K; ++i) {
    for (int j = 0; j <= tr.N; ++j) {
      const int ni = j < tr.N ? i : i + 1;
      const int nj = j < tr.N ? j + 1 : 0;
      Piece p;
      p.S0 = pt(true, i, j);
      p.S1 = pt(true, ni, nj);
      p.J0 = pt(false, i, j);
      p.J1 = pt(false, ni, nj);
      double chord = (p.S1 - p.S0).norm();
      if (tr.jammer_active) chord = std::max(chord, (p.J1 - p.J0).norm());
      p.dur = chord / sc.V;
      p.sched = tr.sched_fly.row(i * (tr.N + 1) + j).transpose();
      tl.push(std::move(p));
    }
    if (i < tr.K) {
      Piece h;
      h.S0 = h.S1 = tr.hover_S[i];
      h.J0 = h.J1 = tr.hover_J[i];
      h.dur = tr.hover_dur[i];
      h.sched = tr.sched_hover.row(i).transpose();
      tl.push(std::move(h));
    }
  }
  return tl;
}

Timeline build(const DiscretePath& path) {
  Timeline tl;
  for (std::size_t m = 0; m + 1 < path.size(); ++m) {
    Piece p;
    p.S0 = path.pos_S[m];
    p.S1 = path.pos_S[m + 1];
    p.J0 = path.pos_J[m];
    p.J1 = path.pos_J[m + 1];
    p.dur = path.t[m + 1] - path.t[m];
    p.sched = path.sched.row(static_cast<Eigen::Index>(m)).transpose();
    tl.push(std::move(p));
  }
  return tl;
}

bool is_binary(const Eigen::MatrixXd& m) {
  return ((m.array() == 0.0) || (m.array() == 1.0)).all();
}

bool is_simplex(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if (std::abs(m.row(r).sum() - 1.0) > 1e-6 || m.row(r).minCoeff() < -1e-9 || m.row(r).maxCoeff() > 1.0 + 1e-9)
      return false;
  return true;
}

Audit run_audit(const Timeline& tl, const Scenario& sc, const std::vector<double>& reported, std::size_t samples) {
  Audit a;
  a.samples = std::max<std::size_t>(samples, 1);
  a.jammer_present = tl.jammer;
  a.mission_time = tl.total;
  a.time_budget_slack = sc.T - tl.total;
  a.throughput_recomputed.assign(static_cast<std::size_t>(sc.K), 0.0);
  a.min_pair_distance = std::numeric_limits<double>::infinity();

  // Midpoint rule inside every piece, samples allotted by duration.
  for (const Piece& p : tl.pieces) {
    if (p.dur <= 0.0) continue;
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(a.samples) * p.dur / tl.total)));
    const double h = p.dur / static_cast<double>(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double z = (static_cast<double>(m) + 0.5) / static_cast<double>(n);
      const Vec2 s = p.S0 + z * (p.S1 - p.S0);
      const Vec2 j = p.J0 + z * (p.J1 - p.J0);
      for (int k = 0; k < sc.K; ++k) {
        const double w = p.sched[k];
        if (w == 0.0) continue;
        const double gk = std::log2(1.0 + snr(s, j, sc.gu_pos[k], sc.sigma2_gu, sc));
        const double ge = std::log2(1.0 + snr(s, j, sc.eve_pos, sc.sigma2_eve, sc));
        a.throughput_recomputed[static_cast<std::size_t>(k)] += w * h * std::max(gk - ge, 0.0);
      }
      const double d = (s - j).norm();
      if (d < a.min_pair_distance) {
        a.min_pair_distance = d;
        a.worst_distance_time = p.t0 + z * p.dur;
      }
    }
  }

  // Uniform grid: finite-difference speed and separation.
  const double dt = tl.total / static_cast<double>(a.samples);
  if (dt > 0.0) {
    auto prev = tl.at(0.0);
    for (std::size_t m = 1; m <= a.samples; ++m) {
      const double t = m == a.samples ? tl.total : dt * static_cast<double>(m);
      const auto cur = tl.at(t);
      double v = (cur.first - prev.first).norm() / dt;
      if (tl.jammer) v = std::max(v, (cur.second - prev.second).norm() / dt);
      if (v > a.max_speed) {
        a.max_speed = v;
        a.worst_speed_time = t;
      }
      const double d = (cur.first - cur.second).norm();
      if (d < a.min_pair_distance) {
        a.min_pair_distance = d;
        a.worst_distance_time = t;
      }
      prev = cur;
    }
  }
  for (const Piece& p : tl.pieces) {
    for (const double d : {(p.S0 - p.J0).norm(), (p.S1 - p.J1).norm()})
      if (d < a.min_pair_distance) {
        a.min_pair_distance = d;
        a.worst_distance_time = p.t0;
      }
  }
  if (!std::isfinite(a.min_pair_distance)) a.min_pair_distance = 0.0;
  a.max_speed_violation = std::max(0.0, a.max_speed - sc.V);

  a.min_throughput = a.throughput_recomputed.empty()
                         ? 0.0
                         : *std::min_element(a.throughput_recomputed.begin(), a.throughput_recomputed.end());
  for (std::size_t k = 0; k < reported.size() && k < a.throughput_recomputed.size(); ++k) {
    const double gap = std::abs(a.throughput_recomputed[k] - reported[k]) / std::max(std::abs(reported[k]), 1e-9);
    a.max_rel_throughput_gap = std::max(a.max_rel_throughput_gap, gap);
  }
  return a;
}

}  // namespace

std::vector<std::string> Audit::violations(const Scenario& sc, bool require_binary) const {
  std::vector<std::string> out;
  if (max_speed > sc.V + 1e-6) out.push_back("speed above V");
  if (jammer_present && min_pair_distance < sc.d_min - 1e-3) out.push_back("separation below d_min");
  if (time_budget_slack < -1e-6 * sc.T) out.push_back("mission time exceeds T");
  if (!scheduling_simplex) out.push_back("scheduling outside the simplex");
  if (require_binary && !scheduling_binary) out.push_back("scheduling not binary");
  return out;
}

bool Audit::feasible(const Scenario& sc, bool require_binary) const {
  return violations(sc, require_binary).empty();
}

Audit audit(const CoShfTrajectory& traj, const Scenario& sc, const std::vector<double>& reported,
            std::size_t samples) {
  Audit a = run_audit(build(traj, sc), sc, reported, samples);
  a.scheduling_binary = is_binary(traj.sched_hover) && is_binary(traj.sched_fly);
  a.scheduling_simplex = is_simplex(traj.sched_hover) && is_simplex(traj.sched_fly);
  return a;
}

Audit audit(const DiscretePath& path, const Scenario& sc, const std::vector<double>& reported,
            std::size_t samples) {
  Audit a = run_audit(build(path), sc, reported, samples);
  const Eigen::MatrixXd used = path.size() > 1 ? Eigen::MatrixXd(path.sched.topRows(path.size() - 1))
                                               : Eigen::MatrixXd(0, sc.K);
  a.scheduling_binary = is_binary(used);
  a.scheduling_simplex = is_simplex(used);
  return a;
}

}  // namespace uavsec
