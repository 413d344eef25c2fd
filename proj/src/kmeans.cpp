#include "sid/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "sid/errors.hpp"
#include "sid/kernels.hpp"

namespace sid {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace

KmeansResult kmeans(const std::vector<const double*>& points, std::size_t dim,
                    int k, Rng rng, int iters) {
  const std::size_t n = points.size();
  if (k < 1) throw InitError("k must be >= 1");
  if (n < static_cast<std::size_t>(k))
    throw InitError("fewer points than clusters");

  KmeansResult res;
  res.centroids = Matrix(k, dim);
  res.assignment.assign(n, 0);

  // k-means++ seeding
  std::vector<double> d2(n, std::numeric_limits<double>::max());
  std::size_t first = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
  std::memcpy(res.centroids.row(0), points[first], dim * sizeof(double));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], res.centroids.row(c - 1), dim));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    }
    std::memcpy(res.centroids.row(c), points[pick], dim * sizeof(double));
  }

  res.counts.assign(k, 0);
  std::vector<double> dist_to_own(n, 0.0);
  for (int it = 0; it < iters; ++it) {
    // assign
    bool moved = false;
    std::fill(res.counts.begin(), res.counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], res.centroids.row(0), dim);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], res.centroids.row(c), dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.assignment[i] != best) moved = true;
      res.assignment[i] = best;
      res.counts[best]++;
      dist_to_own[i] = best_d;
    }

    // refill empty clusters with the worst-explained point
    for (int c = 0; c < k; ++c) {
      if (res.counts[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.counts[res.assignment[i]] > 1 && dist_to_own[i] > far_d) {
          far_d = dist_to_own[i];
          far = i;
        }
      }
      res.counts[res.assignment[far]]--;
      res.assignment[far] = c;
      res.counts[c] = 1;
      dist_to_own[far] = 0.0;
      moved = true;
    }

    // update
    res.centroids.fill(0.0);
    for (std::size_t i = 0; i < n; ++i)
      kernels::axpy(1.0, points[i], res.centroids.row(res.assignment[i]), dim);
    for (int c = 0; c < k; ++c)
      kernels::scale(1.0 / res.counts[c], res.centroids.row(c), dim);

    if (!moved && it > 0) break;
  }
  return res;
}

}  // namespace sid
