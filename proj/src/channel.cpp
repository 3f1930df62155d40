#include "coshf/channel.hpp"

#include <algorithm>
#include <cmath>

namespace uavsec {

Vec2 node_pos(const Scenario& sc, Node m) {
  return m.is_eve() ? sc.eve_pos : sc.gu_pos.at(static_cast<std::size_t>(m.index));
}

double node_noise(const Scenario& sc, Node m) { return m.is_eve() ? sc.sigma2_eve : sc.sigma2_gu; }

double gain(const Vec2& q, const Vec2& w, const Scenario& sc) {
  return sc.beta0 / dist2(q, w, sc.alt);
}

double snr(const Vec2& q_S, const Vec2& q_J, const Vec2& w, double sigma2, const Scenario& sc) {
  return sc.P_S * gain(q_S, w, sc) / (sc.P_J * gain(q_J, w, sc) + sigma2);
}

double snr_hover(const Vec2& q_S, const Vec2& q_J, Node m, const Scenario& sc) {
  const Vec2 w = node_pos(sc, m);
  const double dS = dist2(q_S, w, sc.alt);
  const double dJ = dist2(q_J, w, sc.alt);
  return sc.beta0 * sc.P_S * dJ / (sc.beta0 * sc.P_J * dS + node_noise(sc, m) * dS * dJ);
}

double rate(const Vec2& q_S, const Vec2& q_J, const Vec2& w, double sigma2, const Scenario& sc) {
  return std::log2(1.0 + snr(q_S, q_J, w, sigma2, sc));
}

double rate(const LinkGeometry& link, const Scenario& sc) {
  return rate(link.q_S, link.q_J, node_pos(sc, link.target), node_noise(sc, link.target), sc);
}

double secrecy_gap(const Vec2& q_S, const Vec2& q_J, int k, const Scenario& sc) {
  return rate(q_S, q_J, sc.gu_pos.at(static_cast<std::size_t>(k)), sc.sigma2_gu, sc) -
         rate(q_S, q_J, sc.eve_pos, sc.sigma2_eve, sc);
}

double secrecy_rate(const Vec2& q_S, const Vec2& q_J, int k, const Scenario& sc) {
  return std::max(secrecy_gap(q_S, q_J, k, sc), 0.0);
}

}  // namespace uavsec
