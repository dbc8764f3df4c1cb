#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spheresel/types.hpp"

namespace spheresel {

// Spherical k-means over unit embeddings: assignment by maximum cosine
// similarity, centroids as normalized member means, k-means++ seeding with
// squared angular distance weights.

struct ClusterModel {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> centroids;            // k x dim, each row unit norm
    std::vector<std::uint32_t> assignments;   // one entry per input sample
    std::vector<double> objective_history;    // mean angular distance, per iteration
    std::uint64_t seed = 0;

    std::span<const double> centroid(std::size_t j) const {
        return {centroids.data() + j * dim, dim};
    }
};

ClusterModel fit(const EmbeddingSet& embeddings, std::size_t k, std::uint64_t seed,
                 std::size_t max_iters = 100, double tol = 1e-6);

// Angular distance from z to every centroid, in centroid index order.
std::vector<double> angles_to_centroids(const ClusterModel& model,
                                        std::span<const double> z);

}  // namespace spheresel
