#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace synthqa {

enum class Direction { Minimize, Maximize };

using Point = std::vector<double>;

// a dominates b: no worse in every objective, strictly better in one.
inline bool dominates(const Point& a, const Point& b, const std::vector<Direction>& dirs) {
  bool strictly = false;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double x = dirs[i] == Direction::Minimize ? a[i] : -a[i];
    const double y = dirs[i] == Direction::Minimize ? b[i] : -b[i];
    if (x > y) return false;
    if (x < y) strictly = true;
  }
  return strictly;
}

// Fronts of indices, rank 0 first. Indices inside a front stay ascending.
inline std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Point>& points,
                                                                const std::vector<Direction>& dirs) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j], dirs)) {
        dominated[i].push_back(j);
        ++count[j];
      } else if (dominates(points[j], points[i], dirs)) {
        dominated[j].push_back(i);
        ++count[i];
      }
    }
  }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto i : current) {
      for (auto j : dominated[i]) {
        if (--count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

// Crowding distance of each member of `front`; boundary points get infinity.
inline std::vector<double> crowding_distance(const std::vector<Point>& points, const std::vector<std::size_t>& front) {
  const std::size_t m = front.size();
  std::vector<double> dist(m, 0.0);
  if (m == 0) return dist;
  const std::size_t n_obj = points[front[0]].size();
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < n_obj; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[front[a]][k] < points[front[b]][k]; });
    const double lo = points[front[order.front()]][k];
    const double hi = points[front[order.back()]][k];
    dist[order.front()] = dist[order.back()] = std::numeric_limits<double>::infinity();
    if (hi <= lo) continue;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      dist[order[i]] += (points[front[order[i + 1]]][k] - points[front[order[i - 1]]][k]) / (hi - lo);
    }
  }
  return dist;
}

}  // namespace synthqa
