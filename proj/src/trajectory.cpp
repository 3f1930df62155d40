#include "coshf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "coshf/channel.hpp"
#include "coshf/quadrature.hpp"

namespace uavsec {

CoShfTrajectory CoShfTrajectory::blank(const Scenario& sc, int N) {
  CoShfTrajectory tr;
  tr.K = sc.K;
  tr.N = N;
  tr.start_S = sc.start_S;
  tr.end_S = sc.end_S;
  tr.start_J = sc.start_J;
  tr.end_J = sc.end_J;
  tr.hover_S.assign(sc.K, sc.start_S);
  tr.hover_J.assign(sc.K, sc.start_J);
  tr.turn_S.assign((sc.K + 1) * N, sc.start_S);
  tr.turn_J.assign((sc.K + 1) * N, sc.start_J);
  tr.hover_dur.assign(sc.K, 0.0);
  tr.sched_hover = Eigen::MatrixXd::Constant(sc.K, sc.K, 1.0 / sc.K);
  tr.sched_fly = Eigen::MatrixXd::Constant(tr.num_segments(), sc.K, 1.0 / sc.K);
  return tr;
}

const Vec2& CoShfTrajectory::point(Uav u, int i, int j) const {
  const bool s = u == Uav::S;
  const bool valid = (j == 0 && i >= 0 && i <= K + 1) || (j >= 1 && j <= N && i >= 0 && i <= K);
  if (!valid) throw std::out_of_range("trajectory point index");
  if (j == 0) {
    if (i == 0) return s ? start_S : start_J;
    if (i == K + 1) return s ? end_S : end_J;
    return s ? hover_S[i - 1] : hover_J[i - 1];
  }
  const std::size_t idx = static_cast<std::size_t>(i * N + (j - 1));
  return s ? turn_S[idx] : turn_J[idx];
}

Vec2& CoShfTrajectory::point(Uav u, int i, int j) {
  return const_cast<Vec2&>(static_cast<const CoShfTrajectory&>(*this).point(u, i, j));
}

std::pair<int, int> CoShfTrajectory::next_point(SegmentIndex s) const {
  if (s.j < N) return {s.i, s.j + 1};
  return {s.i + 1, 0};
}

std::pair<Vec2, Vec2> CoShfTrajectory::segment_ends(Uav u, SegmentIndex s) const {
  if (s.i < 0 || s.i > K || s.j < 0 || s.j > N) throw std::out_of_range("segment index");
  const auto [ni, nj] = next_point(s);
  return {point(u, s.i, s.j), point(u, ni, nj)};
}

std::vector<std::string> invariant_violations(const CoShfTrajectory& tr, const Scenario& sc,
                                              double tol) {
  std::vector<std::string> out;
  if (tr.K != sc.K) out.push_back("K mismatch");
  if (static_cast<int>(tr.hover_S.size()) != tr.K || static_cast<int>(tr.hover_J.size()) != tr.K ||
      static_cast<int>(tr.hover_dur.size()) != tr.K)
    out.push_back("hover arrays must have K entries");
  if (static_cast<int>(tr.turn_S.size()) != (tr.K + 1) * tr.N ||
      static_cast<int>(tr.turn_J.size()) != (tr.K + 1) * tr.N)
    out.push_back("turning arrays must have (K+1)N entries");
  if (tr.sched_hover.rows() != tr.K || tr.sched_hover.cols() != tr.K ||
      tr.sched_fly.rows() != tr.num_segments() || tr.sched_fly.cols() != tr.K)
    out.push_back("scheduling matrix shape");
  if (!out.empty()) return out;
  if (tr.start_S != sc.start_S || tr.end_S != sc.end_S || tr.start_J != sc.start_J ||
      tr.end_J != sc.end_J)
    out.push_back("endpoints not pinned to scenario start/end");
  for (int i = 0; i < tr.K; ++i)
    if (tr.hover_dur[i] < -tol) out.push_back("negative hover duration " + std::to_string(i + 1));
  auto check_rows = [&](const Eigen::MatrixXd& m, const char* what) {
    for (int r = 0; r < m.rows(); ++r) {
      if (std::abs(m.row(r).sum() - 1.0) > tol)
        out.push_back(std::string(what) + " row " + std::to_string(r) + " does not sum to 1");
      if (m.row(r).minCoeff() < -tol || m.row(r).maxCoeff() > 1.0 + tol)
        out.push_back(std::string(what) + " row " + std::to_string(r) + " outside [0,1]");
    }
  };
  check_rows(tr.sched_hover, "hover scheduling");
  check_rows(tr.sched_fly, "flight scheduling");
  const double tt = total_time(tr, sc);
  if (tt > sc.T * (1.0 + tol) + tol) out.push_back("total time exceeds T");
  return out;
}

double segment_length(const CoShfTrajectory& tr, Uav u, SegmentIndex seg) {
  const auto [a, b] = tr.segment_ends(u, seg);
  return (b - a).norm();
}

double segment_time(const CoShfTrajectory& tr, SegmentIndex seg, double V) {
  const double dS = segment_length(tr, Uav::S, seg);
  const double dJ = tr.jammer_active ? segment_length(tr, Uav::J, seg) : 0.0;
  const double d = std::max(dS, dJ);
  return d < kZeroChord ? 0.0 : d / V;
}

double segment_speed(const CoShfTrajectory& tr, Uav u, SegmentIndex seg, double V) {
  const double dt = segment_time(tr, seg, V);
  return dt > 0.0 ? segment_length(tr, u, seg) / dt : 0.0;
}

Vec2 position_at(const CoShfTrajectory& tr, Uav u, SegmentIndex seg, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::out_of_range("position_at: z outside [0,1]");
  const auto [a, b] = tr.segment_ends(u, seg);
  if (z == 0.0) return a;
  if (z == 1.0) return b;
  return a + z * (b - a);
}

double total_time(const CoShfTrajectory& tr, const Scenario& sc) {
  double t = 0.0;
  for (double h : tr.hover_dur) t += h;
  for (int s = 0; s < tr.num_segments(); ++s) t += segment_time(tr, tr.segment(s), sc.V);
  return t;
}

double min_pair_distance(const CoShfTrajectory& tr, SegmentIndex seg) {
  const auto [s0, s1] = tr.segment_ends(Uav::S, seg);
  const auto [j0, j1] = tr.segment_ends(Uav::J, seg);
  const Vec2 p = s0 - j0;
  const Vec2 v = (s1 - j1) - p;
  const double vv = v.squaredNorm();
  double z = 0.0;
  if (vv > 0.0) z = std::clamp(-p.dot(v) / vv, 0.0, 1.0);
  return (p + z * v).norm();
}

std::vector<double> throughput(const CoShfTrajectory& tr, const Scenario& sc, int quad_order) {
  const QuadratureRule rule = gauss_legendre01(quad_order);
  std::vector<double> U(tr.K, 0.0);
  for (int i = 0; i < tr.K; ++i) {
    if (tr.hover_dur[i] <= 0.0) continue;
    for (int k = 0; k < tr.K; ++k) {
      const double a = tr.sched_hover(i, k);
      if (a != 0.0) U[k] += a * tr.hover_dur[i] * secrecy_rate(tr.hover_S[i], tr.hover_J[i], k, sc);
    }
  }
  for (int s = 0; s < tr.num_segments(); ++s) {
    const SegmentIndex seg = tr.segment(s);
    const double dt = segment_time(tr, seg, sc.V);
    if (dt <= 0.0) continue;
    const auto [s0, s1] = tr.segment_ends(Uav::S, seg);
    const auto [j0, j1] = tr.segment_ends(Uav::J, seg);
    for (int k = 0; k < tr.K; ++k) {
      const double a = tr.sched_fly(s, k);
      if (a == 0.0) continue;
      double integral = 0.0;
      for (int n = 0; n < rule.order(); ++n) {
        const double z = rule.nodes[n];
        integral += rule.weights[n] * secrecy_rate(s0 + z * (s1 - s0), j0 + z * (j1 - j0), k, sc);
      }
      U[k] += a * dt * integral;
    }
  }
  return U;
}

double min_throughput(const CoShfTrajectory& tr, const Scenario& sc, int quad_order) {
  const auto U = throughput(tr, sc, quad_order);
  return *std::min_element(U.begin(), U.end());
}

int DiscretePath::active_user(std::size_t m) const {
  int best = 0;
  for (int k = 1; k < sched.cols(); ++k)
    if (sched(static_cast<Eigen::Index>(m), k) > sched(static_cast<Eigen::Index>(m), best)) best = k;
  return best;
}

DiscretePath to_discrete(const CoShfTrajectory& tr, const Scenario& sc, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("to_discrete: dt must be positive");

  // Ordered pieces: legs interleaved with hover pairs.
  struct Piece {
    double t0, dur;
    int hover;        // hover pair index (0-based) or -1
    SegmentIndex seg;
  };
  std::vector<Piece> pieces;
  double clock = 0.0;
  for (int i = 0; i <= tr.K; ++i) {
    if (i > 0) {
      pieces.push_back({clock, tr.hover_dur[i - 1], i - 1, {}});
      clock += tr.hover_dur[i - 1];
    }
    for (int j = 0; j <= tr.N; ++j) {
      const SegmentIndex seg{i, j};
      const double d = segment_time(tr, seg, sc.V);
      pieces.push_back({clock, d, -1, seg});
      clock += d;
    }
  }
  const double total = clock;

  DiscretePath path;
  path.dt = dt;
  std::vector<double> times;
  for (long m = 0;; ++m) {
    const double t = static_cast<double>(m) * dt;
    if (t >= total - 1e-12 * std::max(1.0, total)) break;
    times.push_back(t);
  }
  times.push_back(total);
  path.t = times;
  path.sched.resize(static_cast<Eigen::Index>(times.size()), tr.K);

  std::size_t p = 0;
  for (std::size_t m = 0; m < times.size(); ++m) {
    const double t = times[m];
    const bool last = m + 1 == times.size();
    // piece containing [t, t+); zero-length pieces are never active
    while (p + 1 < pieces.size() && (pieces[p].dur <= 0.0 || t >= pieces[p].t0 + pieces[p].dur)) {
      std::size_t q = p + 1;
      while (q < pieces.size() && pieces[q].dur <= 0.0) ++q;
      if (q == pieces.size()) break;
      p = q;
    }
    const Piece& pc = pieces[p];
    Vec2 qS, qJ;
    if (pc.hover >= 0) {
      qS = tr.hover_S[pc.hover];
      qJ = tr.hover_J[pc.hover];
      path.sched.row(static_cast<Eigen::Index>(m)) = tr.sched_hover.row(pc.hover);
    } else {
      const double z = pc.dur > 0.0 ? std::clamp((t - pc.t0) / pc.dur, 0.0, 1.0) : 1.0;
      qS = position_at(tr, Uav::S, pc.seg, z);
      qJ = position_at(tr, Uav::J, pc.seg, z);
      path.sched.row(static_cast<Eigen::Index>(m)) = tr.sched_fly.row(tr.flat(pc.seg));
    }
    if (last) {
      qS = tr.end_S;
      qJ = tr.end_J;
    }
    path.pos_S.push_back(qS);
    path.pos_J.push_back(qJ);
  }
  return path;
}

namespace {

using nlohmann::json;

json pts(const std::vector<Vec2>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back({p.x(), p.y()});
  return a;
}

std::vector<Vec2> pts_from(const json& a) {
  std::vector<Vec2> v;
  for (const auto& p : a) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return v;
}

json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

Eigen::MatrixXd mat_from(const json& a, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(a.size()) != rows) throw std::runtime_error("matrix row count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(a[r].size()) != cols) throw std::runtime_error("matrix col count");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a[r][c].get<double>();
  }
  return m;
}

}  // namespace

std::string trajectory_to_json(const CoShfTrajectory& tr) {
  json j;
  j["K"] = tr.K;
  j["N"] = tr.N;
  j["jammer_active"] = tr.jammer_active;
  j["start_S"] = {tr.start_S.x(), tr.start_S.y()};
  j["end_S"] = {tr.end_S.x(), tr.end_S.y()};
  j["start_J"] = {tr.start_J.x(), tr.start_J.y()};
  j["end_J"] = {tr.end_J.x(), tr.end_J.y()};
  j["hover_S"] = pts(tr.hover_S);
  j["hover_J"] = pts(tr.hover_J);
  j["turn_S"] = pts(tr.turn_S);
  j["turn_J"] = pts(tr.turn_J);
  j["hover_dur"] = tr.hover_dur;
  j["sched_hover"] = mat(tr.sched_hover);
  j["sched_fly"] = mat(tr.sched_fly);
  return j.dump(2) + "\n";
}

CoShfTrajectory trajectory_from_json(const std::string& text) {
  const json j = json::parse(text);
  CoShfTrajectory tr;
  tr.K = j.at("K").get<int>();
  tr.N = j.at("N").get<int>();
  tr.jammer_active = j.at("jammer_active").get<bool>();
  auto pt = [&](const char* key) {
    return Vec2(j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>());
  };
  tr.start_S = pt("start_S");
  tr.end_S = pt("end_S");
  tr.start_J = pt("start_J");
  tr.end_J = pt("end_J");
  tr.hover_S = pts_from(j.at("hover_S"));
  tr.hover_J = pts_from(j.at("hover_J"));
  tr.turn_S = pts_from(j.at("turn_S"));
  tr.turn_J = pts_from(j.at("turn_J"));
  tr.hover_dur = j.at("hover_dur").get<std::vector<double>>();
  tr.sched_hover = mat_from(j.at("sched_hover"), tr.K, tr.K);
  tr.sched_fly = mat_from(j.at("sched_fly"), tr.num_segments(), tr.K);
  return tr;
}

}  // namespace uavsec
