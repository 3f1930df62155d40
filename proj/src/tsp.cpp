#include "coshf/tsp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace uavsec {

double open_path_length(const Vec2& start, const std::vector<Vec2>& cities,
                        const std::vector<int>& order, const Vec2& end) {
  double len = 0.0;
  Vec2 prev = start;
  for (int c : order) {
    len += (cities[c] - prev).norm();
    prev = cities[c];
  }
  return len + (end - prev).norm();
}

namespace {

std::vector<int> held_karp(const Vec2& start, const std::vector<Vec2>& c, const Vec2& end) {
  const int n = static_cast<int>(c.size());
  const int full = 1 << n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(static_cast<std::size_t>(full) * n, inf);
  std::vector<int> parent(static_cast<std::size_t>(full) * n, -1);
  auto at = [n](int mask, int last) { return static_cast<std::size_t>(mask) * n + last; };
  for (int i = 0; i < n; ++i) cost[at(1 << i, i)] = (c[i] - start).norm();
  for (int mask = 1; mask < full; ++mask) {
    for (int last = 0; last < n; ++last) {
      const double base = cost[at(mask, last)];
      if (!(mask & (1 << last)) || base == inf) continue;
      for (int nxt = 0; nxt < n; ++nxt) {
        if (mask & (1 << nxt)) continue;
        const int m2 = mask | (1 << nxt);
        const double v = base + (c[nxt] - c[last]).norm();
        if (v < cost[at(m2, nxt)]) {
          cost[at(m2, nxt)] = v;
          parent[at(m2, nxt)] = last;
        }
      }
    }
  }
  int best = 0;
  double best_cost = inf;
  for (int last = 0; last < n; ++last) {
    const double v = cost[at(full - 1, last)] + (end - c[last]).norm();
    if (v < best_cost) {
      best_cost = v;
      best = last;
    }
  }
  std::vector<int> order;
  int mask = full - 1, cur = best;
  while (cur >= 0) {
    order.push_back(cur);
    const int prev = parent[at(mask, cur)];
    mask &= ~(1 << cur);
    cur = prev;
  }
  std::reverse(order.begin(), order.end());
  return order;
}

std::vector<int> nn_two_opt(const Vec2& start, const std::vector<Vec2>& c, const Vec2& end) {
  const int n = static_cast<int>(c.size());
  std::vector<int> order;
  std::vector<bool> used(n, false);
  Vec2 cur = start;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      if (!used[i] && (c[i] - cur).norm() < bd) {
        bd = (c[i] - cur).norm();
        best = i;
      }
    used[best] = true;
    order.push_back(best);
    cur = c[best];
  }
  // 2-opt on the open path with fixed endpoints
  bool improved = true;
  while (improved) {
    improved = false;
    for (int a = 0; a + 1 < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const Vec2 pa = a == 0 ? start : c[order[a - 1]];
        const Vec2 pb = b + 1 == n ? end : c[order[b + 1]];
        const double before = (c[order[a]] - pa).norm() + (pb - c[order[b]]).norm();
        const double after = (c[order[b]] - pa).norm() + (pb - c[order[a]]).norm();
        if (after < before - 1e-12) {
          std::reverse(order.begin() + a, order.begin() + b + 1);
          improved = true;
        }
      }
    }
  }
  return order;
}

}  // namespace

std::vector<int> open_path_order(const Vec2& start, const std::vector<Vec2>& cities,
                                 const Vec2& end, int exact_limit) {
  if (cities.empty()) return {};
  if (static_cast<int>(cities.size()) <= exact_limit) return held_karp(start, cities, end);
  return nn_two_opt(start, cities, end);
}

}  // namespace uavsec
