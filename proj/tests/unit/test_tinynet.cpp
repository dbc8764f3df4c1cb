#include <doctest.h>

#include <cmath>
#include <cstring>

#include "spheresel/rng.hpp"
#include "spheresel/tinynet.hpp"

using namespace spheresel;

namespace {

FeatureMatrix matrix_from(const std::vector<std::vector<float>>& rows) {
    FeatureMatrix m(0, static_cast<std::uint32_t>(rows.at(0).size()));
    for (const auto& r : rows) m.append_row(r);
    return m;
}

// Originals in even rows, shifted copies in odd rows: a minimal two-domain
// paired dataset.
struct PairedSet {
    FeatureMatrix features;
    std::vector<PairIndices> pairs;
};

PairedSet shifted_pairs(std::size_t n, std::size_t dim, double shift, std::uint64_t seed) {
    Rng rng(seed);
    PairedSet set;
    set.features = FeatureMatrix(0, static_cast<std::uint32_t>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> x(dim), r(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            x[c] = static_cast<float>(rng.normal());
            r[c] = static_cast<float>(x[c] + (c == 0 ? shift : 0.0));
        }
        const auto row = set.features.rows;
        set.features.append_row(x);
        set.features.append_row(r);
        set.pairs.push_back({row, row + 1});
    }
    return set;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TrainerConfig small_config() {
    TrainerConfig cfg;
    cfg.hidden_dim = 16;
    cfg.embed_dim = 8;
    cfg.epochs = 10;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 8;
    cfg.seed = 21;
    return cfg;
}

}  // namespace

TEST_SUITE("tinynet") {

TEST_CASE("forward rejects a dead head") {
    const MlpParams zeros = MlpParams::zeros(4, 4, 4);
    CHECK_THROWS_AS((void)forward(zeros, std::vector<double>{1.0, 2.0, 3.0, 4.0}), Error);
}

TEST_CASE("forward with identity weights reduces to normalize") {
    MlpParams p = MlpParams::zeros(4, 4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        p.w1[i * 4 + i] = 1.0;
        p.w2[i * 4 + i] = 1.0;
    }
    const std::vector<double> v = {1.0, 2.0, 0.5, 4.0};  // nonnegative: ReLU inactive
    const UnitEmbedding z = forward(p, v);
    const UnitEmbedding expected = normalize(v);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(z[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("forward output is unit norm and deterministic") {
    Rng rng(17);
    const MlpParams p = MlpParams::seeded(6, 12, 8, rng);
    std::vector<double> x(6);
    for (double& v : x) v = rng.normal();
    const UnitEmbedding z1 = forward(p, x);
    const UnitEmbedding z2 = forward(p, x);
    CHECK(l2_norm(z1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(bitwise_equal(z1, z2));
    CHECK_THROWS_AS((void)forward(p, std::vector<double>{1.0}), Error);
}

TEST_CASE("cosine annealing endpoints and monotonicity") {
    TrainerConfig cfg = small_config();
    cfg.epochs = 40;
    cfg.learning_rate = 1e-3;
    cfg.lr_floor = 1e-5;
    CHECK(cosine_annealed_lr(cfg, 0) == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(std::abs(cosine_annealed_lr(cfg, cfg.epochs - 1) - 1e-5) <= 1e-12);
    double prev = cosine_annealed_lr(cfg, 0);
    for (std::size_t e = 1; e < cfg.epochs; ++e) {
        const double lr = cosine_annealed_lr(cfg, e);
        CHECK(lr <= prev + 1e-15);
        prev = lr;
    }
    cfg.epochs = 1;
    CHECK(cosine_annealed_lr(cfg, 0) == 1e-3);
}

TEST_CASE("identical pairs keep the loss at the clamp floor") {
    Rng rng(5);
    FeatureMatrix features(0, 6);
    std::vector<PairIndices> pairs;
    for (std::uint32_t i = 0; i < 8; ++i) {
        std::vector<float> x(6);
        for (float& v : x) v = static_cast<float>(rng.normal());
        features.append_row(x);
        pairs.push_back({i, i});  // reconstruction equals the original
    }
    TrainerConfig cfg = small_config();
    const TrainedHead head = train_heads(features, pairs, cfg);
    const double floor =
        std::pow(cfg.loss.m * std::acos(1.0 - cfg.loss.eps_clamp), 2);
    REQUIRE(head.loss_history.size() == cfg.epochs);
    for (const double loss : head.loss_history) {
        CHECK(loss >= 0.0);
        CHECK(loss <= floor + 1e-12);
    }
}

TEST_CASE("EMA teacher update matches hand computation after one step") {
    const PairedSet set = shifted_pairs(1, 5, 1.0, 3);
    TrainerConfig cfg = small_config();
    cfg.epochs = 1;
    cfg.batch_size = 1;

    // Momentum 1 freezes the teacher at the initial student parameters; the
    // student's single step is identical in both runs because the EMA fires
    // only after the gradient step.
    TrainerConfig frozen = cfg;
    frozen.ema_momentum = 1.0;
    const TrainedHead run_frozen = train_heads(set.features, set.pairs, frozen);
    const MlpParams& student0 = run_frozen.teacher;
    const MlpParams& student1 = run_frozen.student;

    TrainerConfig ema = cfg;
    ema.ema_momentum = 0.99;
    const TrainedHead run_ema = train_heads(set.features, set.pairs, ema);
    CHECK(bitwise_equal(run_ema.student.w1, student1.w1));
    for (std::size_t i = 0; i < student0.w1.size(); ++i) {
        const double expected = 0.99 * student0.w1[i] + 0.01 * student1.w1[i];
        CHECK(run_ema.teacher.w1[i] == doctest::Approx(expected).epsilon(1e-15));
    }
    for (std::size_t i = 0; i < student0.b2.size(); ++i) {
        const double expected = 0.99 * student0.b2[i] + 0.01 * student1.b2[i];
        CHECK(run_ema.teacher.b2[i] == doctest::Approx(expected).epsilon(1e-15));
    }

    // Momentum 0 makes the teacher track the student exactly.
    TrainerConfig track = cfg;
    track.ema_momentum = 0.0;
    const TrainedHead run_track = train_heads(set.features, set.pairs, track);
    CHECK(bitwise_equal(run_track.teacher.w1, run_track.student.w1));
    CHECK(bitwise_equal(run_track.teacher.b1, run_track.student.b1));
}

TEST_CASE("training loss trends down on a shifted paired set") {
    const PairedSet set = shifted_pairs(64, 8, 2.0, 77);
    TrainerConfig cfg = small_config();
    cfg.epochs = 20;
    cfg.learning_rate = 3e-3;
    cfg.ema_momentum = 0.5;  // short teacher lag keeps the tail flat at this scale
    const TrainedHead head = train_heads(set.features, set.pairs, cfg);
    REQUIRE(head.loss_history.size() == 20);

    std::vector<double> moving;
    for (std::size_t i = 0; i + 5 <= head.loss_history.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = i; j < i + 5; ++j) acc += head.loss_history[j];
        moving.push_back(acc / 5.0);
    }
    for (std::size_t i = 1; i < moving.size(); ++i) CHECK(moving[i] <= moving[i - 1]);
}

TEST_CASE("trainer config validation") {
    const PairedSet set = shifted_pairs(4, 4, 1.0, 9);
    TrainerConfig cfg = small_config();
    cfg.epochs = 0;
    CHECK_THROWS_AS((void)train_heads(set.features, set.pairs, cfg), Error);
    try {
        (void)train_heads(set.features, set.pairs, cfg);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
    cfg = small_config();
    CHECK_THROWS_AS((void)train_heads(set.features, {}, cfg), Error);
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
    const PairedSet set = shifted_pairs(32, 6, 1.5, 13);
    const TrainerConfig cfg = small_config();
    const TrainedHead a = train_heads(set.features, set.pairs, cfg);
    const TrainedHead b = train_heads(set.features, set.pairs, cfg);
    CHECK(bitwise_equal(a.student.w1, b.student.w1));
    CHECK(bitwise_equal(a.student.b1, b.student.b1));
    CHECK(bitwise_equal(a.student.w2, b.student.w2));
    CHECK(bitwise_equal(a.student.b2, b.student.b2));
    CHECK(bitwise_equal(a.teacher.w1, b.teacher.w1));
    CHECK(bitwise_equal(a.loss_history, b.loss_history));
}

TEST_CASE("divergent training aborts instead of returning garbage") {
    const PairedSet set = shifted_pairs(8, 4, 1.0, 4);
    TrainerConfig cfg = small_config();
    cfg.learning_rate = 1e200;
    cfg.epochs = 5;
    CHECK_THROWS_AS((void)train_heads(set.features, set.pairs, cfg), Error);
}

TEST_CASE("manifest-driven training requires reconstruction pairs") {
    FeatureMatrix features = matrix_from({{1.0f, 2.0f}, {2.0f, 1.0f}});
    SampleManifest manifest;
    manifest.samples.push_back({"a", "t1", 0, std::nullopt, std::nullopt});
    manifest.samples.push_back({"b", "t1", 1, std::nullopt, std::nullopt});
    TrainerConfig cfg = small_config();
    try {
        (void)train_heads(manifest, features, cfg);
        FAIL("expected UnpairedSample");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnpairedSample);
    }
}

TEST_CASE("embed_all preserves order, norm, and duplicates") {
    const PairedSet set = shifted_pairs(10, 6, 1.0, 31);
    const TrainedHead head = train_heads(set.features, set.pairs, small_config());

    FeatureMatrix dup(0, 6);
    dup.append_row(set.features.row(0));
    dup.append_row(set.features.row(2));
    dup.append_row(set.features.row(0));  // duplicate of row 0
    const EmbeddingSet embedded = embed_all(head, dup);
    REQUIRE(embedded.count == 3);
    CHECK(l2_norm(embedded.row(1)) == doctest::Approx(1.0).epsilon(1e-6));
    for (std::size_t c = 0; c < embedded.dim; ++c)
        CHECK(embedded.row(0)[c] == embedded.row(2)[c]);

    const FeatureMatrix empty(0, 6);
    CHECK(embed_all(head, empty).count == 0);

    // Same rows, any thread count: identical bytes.
    const EmbeddingSet t1 = embed_all(head, set.features, HeadSide::Student, 1);
    const EmbeddingSet t4 = embed_all(head, set.features, HeadSide::Student, 4);
    CHECK(bitwise_equal(t1.data, t4.data));
}

}  // TEST_SUITE
