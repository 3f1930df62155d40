#pragma once
// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "coshf/scenario.hpp"

namespace oracle {

using uavsec::Scenario;
using uavsec::Vec2;

// SNR from first principles: received power over noise plus jamming power.
inline double snr(const Vec2& qS, const Vec2& qJ, const Vec2& w, double noise, const Scenario& sc) {
  const double dS = (qS - w).squaredNorm() + sc.alt * sc.alt;
  const double dJ = (qJ - w).squaredNorm() + sc.alt * sc.alt;
  return (sc.P_S * sc.beta0 / dS) / (sc.P_J * sc.beta0 / dJ + noise);
}

inline double secrecy(const Vec2& qS, const Vec2& qJ, int k, const Scenario& sc) {
  const double rk = std::log2(1.0 + oracle::snr(qS, qJ, sc.gu_pos[static_cast<std::size_t>(k)], sc.sigma2_gu, sc));
  const double re = std::log2(1.0 + oracle::snr(qS, qJ, sc.eve_pos, sc.sigma2_eve, sc));
  return std::max(rk - re, 0.0);
}

// Minimum of |p + z v| over z in [0, 1] by dense grid then ternary refinement.
inline double grid_min_distance(const Vec2& p, const Vec2& v, int grid = 2000) {
  int best = 0;
  double bv = 1e300;
  for (int i = 0; i <= grid; ++i) {
    const double d = (p + (double(i) / grid) * v).norm();
    if (d < bv) {
      bv = d;
      best = i;
    }
  }
  double lo = std::max(0.0, double(best - 1) / grid), hi = std::min(1.0, double(best + 1) / grid);
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if ((p + m1 * v).norm() < (p + m2 * v).norm())
      hi = m2;
    else
      lo = m1;
  }
  return std::min(bv, (p + 0.5 * (lo + hi) * v).norm());
}

inline Vec2 rand_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

}  // namespace oracle
