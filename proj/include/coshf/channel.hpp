#pragma once

#include "coshf/scenario.hpp"

namespace uavsec {

/// A ground receiver: user index in [0, K) or the eavesdropper.
struct Node {
  static constexpr int kEve = -1;
  int index = kEve;

  static Node user(int k) { return Node{k}; }
  static Node eve() { return Node{kEve}; }
  bool is_eve() const { return index == kEve; }
};

struct LinkGeometry {
  Vec2 q_S = Vec2::Zero();
  Vec2 q_J = Vec2::Zero();
  Node target;
};

Vec2 node_pos(const Scenario& sc, Node m);
double node_noise(const Scenario& sc, Node m);

/// Squared 3-D distance from a UAV at horizontal position q to a ground point w.
inline double dist2(const Vec2& q, const Vec2& w, double alt) {
  return (q - w).squaredNorm() + alt * alt;
}

/// Free-space gain beta0 / (|q - w|^2 + H^2).
double gain(const Vec2& q, const Vec2& w, const Scenario& sc);

/// Received SNR with the jammer's signal treated as noise.
double snr(const Vec2& q_S, const Vec2& q_J, const Vec2& w, double sigma2, const Scenario& sc);

/// Same quantity written over squared distances:
/// beta0 P_S d_J^2 / (beta0 P_J d_S^2 + sigma^2 d_S^2 d_J^2).
double snr_hover(const Vec2& q_S, const Vec2& q_J, Node m, const Scenario& sc);

/// log2(1 + SNR), bits/s/Hz.
double rate(const Vec2& q_S, const Vec2& q_J, const Vec2& w, double sigma2, const Scenario& sc);
double rate(const LinkGeometry& link, const Scenario& sc);

/// Unclamped difference R_{S,k} - R_{S,e}.
double secrecy_gap(const Vec2& q_S, const Vec2& q_J, int k, const Scenario& sc);

/// max(R_{S,k} - R_{S,e}, 0).
double secrecy_rate(const Vec2& q_S, const Vec2& q_J, int k, const Scenario& sc);

}  // namespace uavsec
