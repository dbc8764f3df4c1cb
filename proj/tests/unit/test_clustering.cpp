#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "spheresel/clustering.hpp"
#include "spheresel/geometry.hpp"
#include "spheresel/rng.hpp"

using namespace spheresel;

namespace {

EmbeddingSet random_embeddings(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    EmbeddingSet set(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        const UnitEmbedding z = normalize(v);
        std::copy(z.begin(), z.end(), set.row(i).begin());
    }
    return set;
}

// Two tight caps around +axis and -axis.
EmbeddingSet antipodal_blobs(std::size_t per_blob, std::size_t dim, double spread,
                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> axis(dim, 0.0);
    axis[0] = 1.0;
    EmbeddingSet set(2 * per_blob, dim);
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const double sign = i < per_blob ? 1.0 : -1.0;
        std::vector<double> v(dim);
        for (std::size_t c = 0; c < dim; ++c) v[c] = sign * axis[c] + spread * rng.normal();
        const UnitEmbedding z = normalize(v);
        std::copy(z.begin(), z.end(), set.row(i).begin());
    }
    return set;
}

double model_objective(const ClusterModel& model, const EmbeddingSet& set) {
    double acc = 0.0;
    for (std::size_t i = 0; i < set.count; ++i)
        acc += spherical_distance(set.row(i), model.centroid(model.assignments[i]));
    return acc / static_cast<double>(set.count);
}

void check_assignment_optimality(const ClusterModel& model, const EmbeddingSet& set) {
    for (std::size_t i = 0; i < set.count; ++i) {
        const double assigned = dot(set.row(i), model.centroid(model.assignments[i]));
        for (std::size_t j = 0; j < model.k; ++j)
            CHECK(dot(set.row(i), model.centroid(j)) <= assigned + 1e-12);
    }
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("k = 1 reduces to the normalized mean") {
    const EmbeddingSet set = random_embeddings(40, 6, 11);
    const ClusterModel model = fit(set, 1, 5);
    std::vector<double> sum(6, 0.0);
    for (std::size_t i = 0; i < set.count; ++i)
        for (std::size_t c = 0; c < 6; ++c) sum[c] += set.row(i)[c];
    const UnitEmbedding expected = normalize(sum);
    for (std::size_t c = 0; c < 6; ++c)
        CHECK(model.centroid(0)[c] == doctest::Approx(expected[c]).epsilon(1e-12));
    for (const std::uint32_t a : model.assignments) CHECK(a == 0);
}

TEST_CASE("antipodal blobs are separated exactly") {
    for (const std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const EmbeddingSet set = antipodal_blobs(10, 5, 0.05, seed);
        const ClusterModel model = fit(set, 2, seed * 13 + 1);

        // Blob membership must match the planted split (up to label swap).
        const std::uint32_t first = model.assignments[0];
        for (std::size_t i = 0; i < 10; ++i) CHECK(model.assignments[i] == first);
        for (std::size_t i = 10; i < 20; ++i) CHECK(model.assignments[i] == 1 - first);

        check_assignment_optimality(model, set);

        // Not worse than the planted partition's own centroids.
        ClusterModel planted;
        planted.k = 2;
        planted.dim = 5;
        planted.seed = 0;
        planted.centroids.assign(10, 0.0);
        planted.assignments.assign(20, 0);
        std::vector<double> sum_a(5, 0.0), sum_b(5, 0.0);
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t c = 0; c < 5; ++c) sum_a[c] += set.row(i)[c];
        for (std::size_t i = 10; i < 20; ++i)
            for (std::size_t c = 0; c < 5; ++c) sum_b[c] += set.row(i)[c];
        const UnitEmbedding ca = normalize(sum_a);
        const UnitEmbedding cb = normalize(sum_b);
        std::copy(ca.begin(), ca.end(), planted.centroids.begin());
        std::copy(cb.begin(), cb.end(), planted.centroids.begin() + 5);
        for (std::size_t i = 10; i < 20; ++i) planted.assignments[i] = 1;

        CHECK(model_objective(model, set) <=
              model_objective(planted, set) + 1e-9);
    }
}

TEST_CASE("k = n drives the objective to the clamp floor") {
    const EmbeddingSet set = random_embeddings(12, 4, 3);
    const ClusterModel model = fit(set, 12, 9);
    CHECK(model.objective_history.back() <= 1e-3);
}

TEST_CASE("objective history is non-increasing") {
    for (const std::uint64_t seed : {7ull, 8ull, 9ull}) {
        const EmbeddingSet set = random_embeddings(200, 8, seed);
        const ClusterModel model = fit(set, 5, seed + 100);
        REQUIRE(!model.objective_history.empty());
        for (std::size_t i = 1; i < model.objective_history.size(); ++i)
            CHECK(model.objective_history[i] <=
                  model.objective_history[i - 1] + 1e-9);
        check_assignment_optimality(model, set);
        for (const std::uint32_t a : model.assignments) CHECK(a < 5);
        for (std::size_t j = 0; j < model.k; ++j)
            CHECK(l2_norm(model.centroid(j)) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("fit is deterministic under a fixed seed") {
    const EmbeddingSet set = random_embeddings(60, 6, 21);
    const ClusterModel a = fit(set, 4, 77);
    const ClusterModel b = fit(set, 4, 77);
    CHECK(a.assignments == b.assignments);
    REQUIRE(a.centroids.size() == b.centroids.size());
    CHECK(std::memcmp(a.centroids.data(), b.centroids.data(),
                      a.centroids.size() * sizeof(double)) == 0);
    CHECK(a.objective_history == b.objective_history);
}

TEST_CASE("input permutation leaves the centroid set unchanged on separated blobs") {
    const EmbeddingSet set = antipodal_blobs(12, 5, 0.03, 6);
    EmbeddingSet reversed(set.count, set.dim);
    for (std::size_t i = 0; i < set.count; ++i) {
        auto src = set.row(set.count - 1 - i);
        std::copy(src.begin(), src.end(), reversed.row(i).begin());
    }
    const ClusterModel a = fit(set, 2, 41);
    const ClusterModel b = fit(reversed, 2, 41);
    for (std::size_t j = 0; j < 2; ++j) {
        double best = 1e300;
        for (std::size_t l = 0; l < 2; ++l) {
            double diff = 0.0;
            for (std::size_t c = 0; c < a.dim; ++c)
                diff = std::max(diff, std::abs(a.centroid(j)[c] - b.centroid(l)[c]));
            best = std::min(best, diff);
        }
        CHECK(best <= 1e-9);
    }
}

TEST_CASE("too few samples is rejected") {
    const EmbeddingSet set = random_embeddings(3, 4, 2);
    try {
        (void)fit(set, 4, 1);
        FAIL("expected TooFewSamples");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewSamples);
    }
}

TEST_CASE("angles to centroids") {
    const EmbeddingSet set = random_embeddings(30, 6, 15);
    const ClusterModel model = fit(set, 3, 4);

    const auto thetas =
        angles_to_centroids(model, model.centroid(1));
    REQUIRE(thetas.size() == 3);
    CHECK(thetas[1] <= 1e-3);
    for (const double t : thetas) {
        CHECK(t >= 0.0);
        CHECK(t <= M_PI);
    }

    const ClusterModel single = fit(set, 1, 4);
    CHECK(angles_to_centroids(single, set.row(0)).size() == 1);

    CHECK_THROWS_AS(
        (void)angles_to_centroids(model, std::vector<double>{1.0, 0.0}), Error);
}

}  // TEST_SUITE
