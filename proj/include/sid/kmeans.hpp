#ifndef SID_KMEANS_HPP
#define SID_KMEANS_HPP

#include <cstddef>
#include <vector>

#include "sid/matrix.hpp"
#include "sid/rng.hpp"

namespace sid {

struct KmeansResult {
  Matrix centroids;             // k x dim
  std::vector<int> assignment;  // per point
  std::vector<int> counts;      // per centroid, never zero
};

// Lloyd iterations from a k-means++ seeding. Deterministic given the rng
// state; empty clusters are refilled with the point farthest from its
// centroid.
KmeansResult kmeans(const std::vector<const double*>& points, std::size_t dim,
                    int k, Rng rng, int iters = 20);

}  // namespace sid

#endif  // SID_KMEANS_HPP
