#include <doctest.h>

#include <cmath>

#include "spheresel/geometry.hpp"
#include "spheresel/rng.hpp"

using namespace spheresel;

namespace {

UnitEmbedding random_unit(std::size_t dim, Rng& rng) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    return normalize(v);
}

// Independent loss for finite-difference checks: arccos of the normalized
// dot product, squared, scaled by m^2. No calls into the library.
double reference_pair_loss(const std::vector<double>& p, const std::vector<double>& q,
                           double m, double eps) {
    double dot = 0.0, np = 0.0, nq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        dot += p[i] * q[i];
        np += p[i] * p[i];
        nq += q[i] * q[i];
    }
    double s = dot / (std::sqrt(np) * std::sqrt(nq));
    s = std::min(std::max(s, -1.0 + eps), 1.0 - eps);
    const double theta = std::acos(s);
    return m * m * theta * theta;
}

double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("normalize scales to the unit sphere") {
    const UnitEmbedding z = normalize(std::vector<double>{3.0, 4.0});
    CHECK(z[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(l2_norm(z) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize is idempotent and positive-scale invariant") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const UnitEmbedding u = random_unit(8, rng);
        const UnitEmbedding again = normalize(u);
        for (std::size_t i = 0; i < u.size(); ++i)
            CHECK(std::abs(again[i] - u[i]) <= 1e-12);

        std::vector<double> v(8);
        for (double& x : v) x = rng.uniform(-5.0, 5.0);
        const UnitEmbedding base = normalize(v);
        for (const double c : {1e-6, 0.5, 2.0, 3.7, 1e6}) {
            std::vector<double> scaled = v;
            for (double& x : scaled) x *= c;
            const UnitEmbedding zs = normalize(scaled);
            for (std::size_t i = 0; i < v.size(); ++i)
                CHECK(std::abs(zs[i] - base[i]) <= 1e-12);
        }
    }
}

TEST_CASE("normalize rejects degenerate input") {
    CHECK_THROWS_AS((void)normalize(std::vector<double>{0.0, 0.0}), Error);
    try {
        (void)normalize(std::vector<double>{0.0, 0.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVector);
    }
    CHECK_THROWS_AS((void)normalize(std::vector<double>{1e-13, 0.0}), Error);
    CHECK_THROWS_AS((void)normalize(std::vector<double>{1.0}), Error);
}

TEST_CASE("spherical distance basics") {
    const UnitEmbedding a = normalize(std::vector<double>{1.0, 0.0, 0.0});
    const UnitEmbedding b = normalize(std::vector<double>{0.0, 1.0, 0.0});
    std::vector<double> neg_a = {-1.0, 0.0, 0.0};

    CHECK(spherical_distance(a, a) <= std::acos(1.0 - kDefaultClampEps) + 1e-15);
    CHECK(spherical_distance(a, b) == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK(spherical_distance(a, neg_a) == doctest::Approx(M_PI).epsilon(1e-3));
    CHECK_THROWS_AS((void)spherical_distance(a, std::vector<double>{1.0, 0.0}), Error);
}

TEST_CASE("spherical distance symmetry and triangle inequality") {
    Rng rng(1234);
    for (int rep = 0; rep < 1000; ++rep) {
        const UnitEmbedding a = random_unit(6, rng);
        const UnitEmbedding b = random_unit(6, rng);
        const UnitEmbedding c = random_unit(6, rng);
        CHECK(spherical_distance(a, b) == spherical_distance(b, a));
        CHECK(spherical_distance(a, c) <=
              spherical_distance(a, b) + spherical_distance(b, c) + 1e-9);
        const double d = spherical_distance(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= M_PI);
    }
}

TEST_CASE("angular loss at the optimum and at orthogonality") {
    LossConfig cfg;
    Rng rng(3);
    std::vector<UnitEmbedding> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(random_unit(8, rng));

    const double floor = std::pow(cfg.m * std::acos(1.0 - cfg.eps_clamp), 2);
    CHECK(angular_loss(batch, batch, cfg) <= floor + 1e-12);

    const std::vector<UnitEmbedding> f = {normalize(std::vector<double>{1.0, 0.0})};
    const std::vector<UnitEmbedding> g = {normalize(std::vector<double>{0.0, 1.0})};
    CHECK(angular_loss(f, g, cfg) ==
          doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-9 / (4 * M_PI * M_PI)));
}

TEST_CASE("angular loss scales exactly with m squared") {
    Rng rng(11);
    std::vector<UnitEmbedding> f, g;
    for (int i = 0; i < 7; ++i) {
        f.push_back(random_unit(8, rng));
        g.push_back(random_unit(8, rng));
    }
    LossConfig unit_cfg;
    unit_cfg.m = 1.0;
    const double base = angular_loss(f, g, unit_cfg);
    for (const double m : {4.0, 3.0, 0.25}) {
        LossConfig cfg;
        cfg.m = m;
        CHECK(angular_loss(f, g, cfg) == m * m * base);
    }
}

TEST_CASE("angular loss with m = 1 matches squared spherical distance") {
    Rng rng(99);
    LossConfig cfg;
    cfg.m = 1.0;
    for (int rep = 0; rep < 100; ++rep) {
        const UnitEmbedding a = random_unit(8, rng);
        const UnitEmbedding b = random_unit(8, rng);
        const double d = spherical_distance(a, b);
        const double loss = angular_loss({a}, {b}, cfg);
        CHECK(loss == doctest::Approx(d * d).epsilon(1e-12));
    }
}

TEST_CASE("angular loss input validation") {
    LossConfig cfg;
    std::vector<UnitEmbedding> empty;
    std::vector<UnitEmbedding> one = {normalize(std::vector<double>{1.0, 1.0})};
    CHECK_THROWS_AS((void)angular_loss(empty, empty, cfg), Error);
    CHECK_THROWS_AS((void)angular_loss(one, empty, cfg), Error);
    LossConfig bad;
    bad.m = -1.0;
    CHECK_THROWS_AS((void)angular_loss(one, one, bad), Error);
}

TEST_CASE("gradient matches central finite differences") {
    LossConfig cfg;
    Rng rng(2024);
    const double h = 1e-5;
    int tested = 0;
    while (tested < 200) {
        const UnitEmbedding f = random_unit(8, rng);
        const UnitEmbedding g = random_unit(8, rng);
        if (std::abs(dot(f, g)) > 0.99) continue;
        ++tested;
        const auto [grad_f, grad_g] = angular_loss_grad(f, g, cfg);
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::vector<double> fp(f.begin(), f.end()), fm(f.begin(), f.end());
            fp[i] += h;
            fm[i] -= h;
            const double fd = (reference_pair_loss(fp, g, cfg.m, cfg.eps_clamp) -
                               reference_pair_loss(fm, g, cfg.m, cfg.eps_clamp)) /
                              (2.0 * h);
            CHECK(rel_error(grad_f[i], fd) < 1e-4);

            std::vector<double> gp(g.begin(), g.end()), gm(g.begin(), g.end());
            gp[i] += h;
            gm[i] -= h;
            const double fd_g = (reference_pair_loss(f, gp, cfg.m, cfg.eps_clamp) -
                                 reference_pair_loss(f, gm, cfg.m, cfg.eps_clamp)) /
                                (2.0 * h);
            CHECK(rel_error(grad_g[i], fd_g) < 1e-4);
        }
    }
}

TEST_CASE("gradient vanishes at the loss minimum") {
    LossConfig cfg;
    Rng rng(5);
    const UnitEmbedding f = random_unit(16, rng);
    const auto [grad_f, grad_g] = angular_loss_grad(f, f, cfg);
    CHECK(l2_norm(grad_f) <= 1e-3);
    CHECK(l2_norm(grad_g) <= 1e-3);
}

TEST_CASE("gradient lies in the tangent space") {
    LossConfig cfg;
    Rng rng(6);
    for (int rep = 0; rep < 50; ++rep) {
        const UnitEmbedding f = random_unit(8, rng);
        const UnitEmbedding g = random_unit(8, rng);
        const auto [grad_f, grad_g] = angular_loss_grad(f, g, cfg);
        CHECK(std::abs(dot(grad_f, f)) <= 1e-8);
        CHECK(std::abs(dot(grad_g, g)) <= 1e-8);
        for (const double v : grad_f) CHECK(std::isfinite(v));
    }
}

TEST_CASE("gradient stays finite at clamped extremes") {
    LossConfig cfg;
    const UnitEmbedding a = normalize(std::vector<double>{1.0, 0.0});
    std::vector<double> neg = {-1.0, 0.0};
    const auto [gf, gg] = angular_loss_grad(a, neg, cfg);
    for (const double v : gf) CHECK(std::isfinite(v));
    for (const double v : gg) CHECK(std::isfinite(v));
}

TEST_CASE("normalize pullback projects and rescales") {
    Rng rng(8);
    std::vector<double> v(6);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    const double norm = l2_norm(v);
    const UnitEmbedding z = normalize(v);
    std::vector<double> upstream(6);
    for (double& x : upstream) x = rng.normal();
    const auto down = normalize_pullback(z, norm, upstream);
    CHECK(std::abs(dot(down, z)) <= 1e-12);  // tangent after projection
}

}  // TEST_SUITE
