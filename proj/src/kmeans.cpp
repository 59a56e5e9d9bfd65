#include "ebmix/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ebmix/errors.hpp"

namespace ebmix {

namespace {

double dist2(const Point2& a, const Point2& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

std::size_t count_distinct(std::span<const Point2> points, std::size_t cap) {
  std::vector<Point2> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  const auto last = std::unique(sorted.begin(), sorted.end());
  return std::min<std::size_t>(static_cast<std::size_t>(last - sorted.begin()), cap);
}

KMeansResult quantile_split(std::span<const Point2> points, int k) {
  const std::size_t q = points.size();
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a][0] < points[b][0];
  });
  KMeansResult res;
  res.quantile_fallback = true;
  res.converged = true;
  res.assignment.assign(q, 0);
  res.centers.assign(static_cast<std::size_t>(k), Point2{0.0, 0.0});
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (std::size_t rank = 0; rank < q; ++rank) {
    const int c = static_cast<int>(rank * static_cast<std::size_t>(k) / q);
    const std::size_t j = order[rank];
    res.assignment[j] = c;
    res.centers[c][0] += points[j][0];
    res.centers[c][1] += points[j][1];
    counts[c] += 1.0;
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0.0) {
      res.centers[c][0] /= counts[c];
      res.centers[c][1] /= counts[c];
    }
  }
  res.objective_history.push_back(kmeans_objective(points, res.centers, res.assignment));
  return res;
}

}  // namespace

double kmeans_objective(std::span<const Point2> points, std::span<const Point2> centers,
                        std::span<const int> assignment) {
  double total = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j)
    total += dist2(points[j], centers[assignment[j]]);
  return total;
}

KMeansResult kmeans(std::span<const Point2> points, int k, RngStream& rng, int max_iter) {
  const std::size_t q = points.size();
  if (k < 1 || static_cast<std::size_t>(k) > q)
    throw ParameterError("kmeans: need 1 <= k <= number of points");
  if (count_distinct(points, static_cast<std::size_t>(k)) < static_cast<std::size_t>(k))
    return quantile_split(points, k);

  KMeansResult res;
  // k-means++ seeding.
  res.centers.push_back(points[rng.below(q)]);
  std::vector<double> d2(q);
  for (std::size_t j = 0; j < q; ++j) d2[j] = dist2(points[j], res.centers[0]);
  while (res.centers.size() < static_cast<std::size_t>(k)) {
    double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (pick = 0; pick + 1 < q; ++pick) {
        u -= d2[pick];
        if (u < 0.0 && d2[pick] > 0.0) break;
      }
      while (d2[pick] == 0.0) pick = (pick + 1) % q;
    }
    res.centers.push_back(points[pick]);
    for (std::size_t j = 0; j < q; ++j)
      d2[j] = std::min(d2[j], dist2(points[j], res.centers.back()));
  }

  res.assignment.assign(q, -1);
  auto assign = [&] {
    bool changed = false;
    for (std::size_t j = 0; j < q; ++j) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = dist2(points[j], res.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != res.assignment[j]) {
        res.assignment[j] = best;
        changed = true;
      }
    }
    return changed;
  };
  assign();
  res.objective_history.push_back(kmeans_objective(points, res.centers, res.assignment));

  for (int it = 0; it < max_iter; ++it) {
    std::vector<Point2> sums(static_cast<std::size_t>(k), Point2{0.0, 0.0});
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (std::size_t j = 0; j < q; ++j) {
      sums[res.assignment[j]][0] += points[j][0];
      sums[res.assignment[j]][1] += points[j][1];
      counts[res.assignment[j]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0)
        res.centers[c] = {sums[c][0] / counts[c], sums[c][1] / counts[c]};
    }
    const bool changed = assign();
    res.objective_history.push_back(kmeans_objective(points, res.centers, res.assignment));
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace ebmix
