#pragma once

#include <array>
#include <span>
#include <vector>

#include "ebmix/rng.hpp"

namespace ebmix {

using Point2 = std::array<double, 2>;

struct KMeansResult {
  std::vector<Point2> centers;
  std::vector<int> assignment;  // 0-based cluster index per point
  // Within-cluster sum of squares after seeding and after each Lloyd pass.
  std::vector<double> objective_history;
  bool converged = false;
  // True when the data had fewer than k distinct points and the equal-count
  // quantile split on the first coordinate was used instead.
  bool quantile_fallback = false;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters keep their
/// previous center, so the objective is non-increasing across passes.
KMeansResult kmeans(std::span<const Point2> points, int k, RngStream& rng,
                    int max_iter = 100);

double kmeans_objective(std::span<const Point2> points, std::span<const Point2> centers,
                        std::span<const int> assignment);

}  // namespace ebmix
