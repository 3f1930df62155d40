#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "coshf/tsp.hpp"
#include "oracles.hpp"

using namespace uavsec;

namespace {

double brute_force(const Vec2& s, const std::vector<Vec2>& c, const Vec2& e) {
  std::vector<int> p(c.size());
  std::iota(p.begin(), p.end(), 0);
  double best = 1e300;
  do best = std::min(best, open_path_length(s, c, p, e));
  while (std::next_permutation(p.begin(), p.end()));
  return best;
}

bool is_permutation_of_n(std::vector<int> o, std::size_t n) {
  std::sort(o.begin(), o.end());
  for (std::size_t i = 0; i < o.size(); ++i)
    if (o[i] != static_cast<int>(i)) return false;
  return o.size() == n;
}

}  // namespace

TEST_CASE("exact order matches brute force") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 7;
    std::vector<Vec2> c;
    for (int i = 0; i < n; ++i) c.push_back(oracle::rand_point(rng, 0, 500));
    const Vec2 s = oracle::rand_point(rng, 0, 500), e = oracle::rand_point(rng, 0, 500);
    const auto order = open_path_order(s, c, e);
    REQUIRE(is_permutation_of_n(order, c.size()));
    CHECK(open_path_length(s, c, order, e) == doctest::Approx(brute_force(s, c, e)).epsilon(1e-12));
  }
}

TEST_CASE("collinear cities follow the line") {
  const std::vector<Vec2> c = {{300, 0}, {100, 0}, {200, 0}};
  CHECK(open_path_order({0, 0}, c, {400, 0}) == std::vector<int>{1, 2, 0});
}

TEST_CASE("single city") {
  CHECK(open_path_order({0, 0}, {{5, 5}}, {9, 9}) == std::vector<int>{0});
  CHECK(open_path_order({0, 0}, {}, {9, 9}).empty());
}

TEST_CASE("heuristic beyond the exact limit stays a valid, locally optimal tour") {
  std::mt19937_64 rng(5);
  std::vector<Vec2> c;
  for (int i = 0; i < 9; ++i) c.push_back(oracle::rand_point(rng, 0, 500));
  const Vec2 s(0, 0), e(500, 500);
  const auto h = open_path_order(s, c, e, 3);  // force the heuristic
  REQUIRE(is_permutation_of_n(h, c.size()));
  const double exact = open_path_length(s, c, open_path_order(s, c, e), e);
  const double heur = open_path_length(s, c, h, e);
  CHECK(heur >= exact - 1e-9);
  CHECK(heur <= 1.3 * exact);
  // No single 2-opt reversal improves it.
  for (std::size_t a = 0; a + 1 < h.size(); ++a)
    for (std::size_t b = a + 1; b < h.size(); ++b) {
      auto r = h;
      std::reverse(r.begin() + static_cast<long>(a), r.begin() + static_cast<long>(b) + 1);
      CHECK(open_path_length(s, c, r, e) >= heur - 1e-9);
    }
}
