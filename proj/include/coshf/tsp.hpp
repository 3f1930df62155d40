#pragma once

#include <vector>

#include "coshf/scenario.hpp"

namespace uavsec {

/// Visiting order of `cities` on the shortest open path start -> all cities -> end.
/// Exact Held-Karp dynamic program up to `exact_limit` cities, nearest
/// neighbour plus 2-opt beyond that.
std::vector<int> open_path_order(const Vec2& start, const std::vector<Vec2>& cities,
                                 const Vec2& end, int exact_limit = 12);

double open_path_length(const Vec2& start, const std::vector<Vec2>& cities,
                        const std::vector<int>& order, const Vec2& end);

}  // namespace uavsec
