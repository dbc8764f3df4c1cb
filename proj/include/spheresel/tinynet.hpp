#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spheresel/geometry.hpp"
#include "spheresel/rng.hpp"
#include "spheresel/types.hpp"

namespace spheresel {

// Minimal two-layer projection head (input -> hidden -> embed, ReLU in
// between) with manual backpropagation, and the teacher-student training
// loop that aligns original samples with their reconstructions on the
// hypersphere.

struct MlpParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t output_dim = 0;
    std::vector<double> w1;  // hidden_dim x input_dim, row-major
    std::vector<double> b1;  // hidden_dim
    std::vector<double> w2;  // output_dim x hidden_dim, row-major
    std::vector<double> b2;  // output_dim

    static MlpParams zeros(std::size_t in, std::size_t hidden, std::size_t out);
    // Fan-in scaled normal init: entries ~ N(0, 1/sqrt(fan_in)).
    static MlpParams seeded(std::size_t in, std::size_t hidden, std::size_t out,
                            Rng& rng);

    void validate() const;
    std::size_t parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size();
    }
};

struct TrainerConfig {
    std::size_t epochs = 200;
    double learning_rate = 1e-4;
    double lr_floor = 0.0;       // cosine annealing target
    std::size_t batch_size = 32;
    double ema_momentum = 0.99;  // 1.0 freezes the teacher
    std::uint64_t seed = 42;
    std::size_t hidden_dim = 512;
    std::size_t embed_dim = 256;
    LossConfig loss;

    void validate() const;
};

struct TrainedHead {
    MlpParams student;
    MlpParams teacher;
    std::vector<double> loss_history;  // per-epoch mean pair loss
    TrainerConfig config;
};

// Everything backprop needs from one forward pass.
struct ForwardTrace {
    std::vector<double> hidden_pre;  // before ReLU
    std::vector<double> hidden;      // after ReLU
    std::vector<double> output;      // before normalization
    double output_norm = 0.0;
    UnitEmbedding embedding;
};

ForwardTrace forward_trace(const MlpParams& params, std::span<const double> features);
UnitEmbedding forward(const MlpParams& params, std::span<const double> features);
UnitEmbedding forward(const MlpParams& params, std::span<const float> features);

// Original/reconstruction row pair in one feature matrix.
struct PairIndices {
    std::uint32_t original_row = 0;
    std::uint32_t recon_row = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Stage III: the teacher embeds the original sample, the student embeds its
// reconstruction, Adam follows the angular-loss gradient through the student
// only, and the teacher tracks the student as an EMA after every step.
TrainedHead train_heads(const FeatureMatrix& features,
                        const std::vector<PairIndices>& pairs,
                        const TrainerConfig& cfg, const EpochCallback& on_epoch = {});

// Pairs taken from the manifest's unlabeled samples; throws UnpairedSample
// when one of them lacks a reconstruction row.
TrainedHead train_heads(const SampleManifest& manifest, const FeatureMatrix& features,
                        const TrainerConfig& cfg, const EpochCallback& on_epoch = {});

enum class HeadSide { Student, Teacher };

// Embeds every row with the chosen frozen parameters; row order preserved.
EmbeddingSet embed_all(const TrainedHead& head, const FeatureMatrix& features,
                       HeadSide side = HeadSide::Student, int threads = 1);

// Embeds a subset of rows, output row i corresponding to rows[i].
EmbeddingSet embed_rows(const TrainedHead& head, const FeatureMatrix& features,
                        std::span<const std::uint32_t> rows,
                        HeadSide side = HeadSide::Student, int threads = 1);

// Per-epoch learning rate: cfg.learning_rate at epoch 0 decaying to
// cfg.lr_floor at the last epoch along a half cosine.
double cosine_annealed_lr(const TrainerConfig& cfg, std::size_t epoch);

}  // namespace spheresel
