#include "spheresel/clustering.hpp"

#include <cmath>
#include <string>

#include "spheresel/geometry.hpp"
#include "spheresel/rng.hpp"

namespace spheresel {

namespace {

// Index of the max-cosine centroid, ties broken by lowest index.
std::uint32_t nearest_centroid(const ClusterModel& model, std::span<const double> z) {
    std::uint32_t best = 0;
    double best_cos = dot(model.centroid(0), z);
    for (std::size_t j = 1; j < model.k; ++j) {
        const double c = dot(model.centroid(j), z);
        if (c > best_cos) {
            best_cos = c;
            best = static_cast<std::uint32_t>(j);
        }
    }
    return best;
}

double mean_angular_objective(const ClusterModel& model, const EmbeddingSet& embeddings) {
    double acc = 0.0;
    for (std::size_t i = 0; i < embeddings.count; ++i)
        acc += spherical_distance(embeddings.row(i),
                                  model.centroid(model.assignments[i]));
    return acc / static_cast<double>(embeddings.count);
}

void assign_all(ClusterModel& model, const EmbeddingSet& embeddings) {
    for (std::size_t i = 0; i < embeddings.count; ++i)
        model.assignments[i] = nearest_centroid(model, embeddings.row(i));
}

// Seeded k-means++ on angular distance: first pick uniform, later picks
// proportional to the squared angular distance to the nearest chosen centroid.
void seed_centroids(ClusterModel& model, const EmbeddingSet& embeddings, Rng& rng) {
    const std::size_t n = embeddings.count;
    std::vector<bool> chosen(n, false);
    std::vector<double> min_dist(n, 0.0);

    std::size_t first = rng.index(n);
    chosen[first] = true;
    std::copy(embeddings.row(first).begin(), embeddings.row(first).end(),
              model.centroids.begin());
    for (std::size_t i = 0; i < n; ++i)
        min_dist[i] = spherical_distance(embeddings.row(i), embeddings.row(first));

    for (std::size_t j = 1; j < model.k; ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!chosen[i]) total += min_dist[i] * min_dist[i];

        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                acc += min_dist[i] * min_dist[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // All remaining points duplicate a chosen centroid; take the
            // first unchosen one.
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        chosen[pick] = true;
        auto dst = model.centroids.begin() + static_cast<std::ptrdiff_t>(j * model.dim);
        std::copy(embeddings.row(pick).begin(), embeddings.row(pick).end(), dst);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = spherical_distance(embeddings.row(i), embeddings.row(pick));
            if (d < min_dist[i]) min_dist[i] = d;
        }
    }
}

// Recomputes centroids as normalized member means. Empty clusters and
// degenerate (near-zero) member sums are reseeded by seizing the sample
// farthest from its current centroid, taken from a cluster that can spare one.
void update_centroids(ClusterModel& model, const EmbeddingSet& embeddings) {
    const std::size_t k = model.k;
    const std::size_t d = model.dim;
    std::vector<double> sums(k * d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < embeddings.count; ++i) {
        const std::uint32_t a = model.assignments[i];
        ++counts[a];
        auto row = embeddings.row(i);
        double* dst = sums.data() + a * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] += row[c];
    }

    std::vector<bool> needs_reseed(k, false);
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            needs_reseed[j] = true;
            continue;
        }
        std::span<const double> sum(sums.data() + j * d, d);
        if (l2_norm(sum) <= kZeroNormThreshold) {
            needs_reseed[j] = true;  // DegenerateMean repair
            continue;
        }
        const UnitEmbedding c = normalize(sum);
        std::copy(c.begin(), c.end(),
                  model.centroids.begin() + static_cast<std::ptrdiff_t>(j * d));
    }

    for (std::size_t j = 0; j < k; ++j) {
        if (!needs_reseed[j]) continue;
        std::size_t farthest = embeddings.count;
        double farthest_dist = -1.0;
        for (std::size_t i = 0; i < embeddings.count; ++i) {
            const std::uint32_t a = model.assignments[i];
            if (a == j || counts[a] < 2) continue;
            const double dist =
                spherical_distance(embeddings.row(i), model.centroid(a));
            if (dist > farthest_dist) {
                farthest_dist = dist;
                farthest = i;
            }
        }
        if (farthest == embeddings.count)
            throw Error(ErrorCode::DegenerateMean,
                        "cannot repair cluster " + std::to_string(j));
        --counts[model.assignments[farthest]];
        model.assignments[farthest] = static_cast<std::uint32_t>(j);
        counts[j] = 1;
        auto row = embeddings.row(farthest);
        std::copy(row.begin(), row.end(),
                  model.centroids.begin() + static_cast<std::ptrdiff_t>(j * d));
    }
}

}  // namespace

ClusterModel fit(const EmbeddingSet& embeddings, std::size_t k, std::uint64_t seed,
                 std::size_t max_iters, double tol) {
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
    if (embeddings.count < k)
        throw Error(ErrorCode::TooFewSamples,
                    std::to_string(embeddings.count) + " samples for k = " +
                        std::to_string(k));

    ClusterModel model;
    model.k = k;
    model.dim = embeddings.dim;
    model.seed = seed;
    model.centroids.assign(k * embeddings.dim, 0.0);
    model.assignments.assign(embeddings.count, 0);

    Rng rng(seed);
    seed_centroids(model, embeddings, rng);
    assign_all(model, embeddings);
    double objective = mean_angular_objective(model, embeddings);
    model.objective_history.push_back(objective);

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        ClusterModel next = model;
        next.objective_history = {};
        update_centroids(next, embeddings);
        assign_all(next, embeddings);
        const double next_objective = mean_angular_objective(next, embeddings);

        if (next_objective > objective) break;  // keep the better iterate

        model.centroids = std::move(next.centroids);
        model.assignments = std::move(next.assignments);
        model.objective_history.push_back(next_objective);
        const double improvement = objective - next_objective;
        objective = next_objective;
        if (improvement < tol) break;
    }
    return model;
}

std::vector<double> angles_to_centroids(const ClusterModel& model,
                                        std::span<const double> z) {
    if (z.size() != model.dim)
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding dimension " + std::to_string(z.size()) +
                        ", centroids have " + std::to_string(model.dim));
    std::vector<double> out(model.k);
    for (std::size_t j = 0; j < model.k; ++j)
        out[j] = spherical_distance(z, model.centroid(j));
    return out;
}

}  // namespace spheresel
