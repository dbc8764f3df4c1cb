#include "spheresel/tinynet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spheresel/parallel.hpp"

namespace spheresel {

namespace {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_step(std::vector<double>& params, const std::vector<double>& grad,
               AdamState& state, double lr) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grad[i];
        state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
}

void ema_update(std::vector<double>& teacher, const std::vector<double>& student,
                double momentum) {
    for (std::size_t i = 0; i < teacher.size(); ++i)
        teacher[i] = momentum * teacher[i] + (1.0 - momentum) * student[i];
}

std::vector<double> to_double(std::span<const float> v) {
    return std::vector<double>(v.begin(), v.end());
}

}  // namespace

MlpParams MlpParams::zeros(std::size_t in, std::size_t hidden, std::size_t out) {
    MlpParams p;
    p.input_dim = in;
    p.hidden_dim = hidden;
    p.output_dim = out;
    p.w1.assign(hidden * in, 0.0);
    p.b1.assign(hidden, 0.0);
    p.w2.assign(out * hidden, 0.0);
    p.b2.assign(out, 0.0);
    return p;
}

MlpParams MlpParams::seeded(std::size_t in, std::size_t hidden, std::size_t out,
                            Rng& rng) {
    MlpParams p = zeros(in, hidden, out);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (double& w : p.w1) w = rng.normal(0.0, s1);
    for (double& w : p.w2) w = rng.normal(0.0, s2);
    return p;
}

void MlpParams::validate() const {
    if (input_dim == 0 || hidden_dim == 0 || output_dim < 2)
        throw Error(ErrorCode::InvalidConfig,
                    "mlp dims must satisfy input>=1, hidden>=1, output>=2");
    if (w1.size() != hidden_dim * input_dim || b1.size() != hidden_dim ||
        w2.size() != output_dim * hidden_dim || b2.size() != output_dim)
        throw Error(ErrorCode::DimensionMismatch, "mlp parameter shapes inconsistent");
    auto all_finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(),
                           [](double x) { return std::isfinite(x); });
    };
    if (!all_finite(w1) || !all_finite(b1) || !all_finite(w2) || !all_finite(b2))
        throw Error(ErrorCode::NonFinite, "mlp parameters contain non-finite values");
}

void TrainerConfig::validate() const {
    if (epochs < 1)
        throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (!(learning_rate > 0.0))
        throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
    if (!(lr_floor >= 0.0 && lr_floor <= learning_rate))
        throw Error(ErrorCode::InvalidConfig, "lr_floor must be in [0, learning_rate]");
    if (batch_size < 1)
        throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
    if (!(ema_momentum >= 0.0 && ema_momentum <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "ema_momentum must be in [0, 1]");
    if (hidden_dim < 1 || embed_dim < 2)
        throw Error(ErrorCode::InvalidConfig, "hidden_dim >= 1 and embed_dim >= 2 required");
    loss.validate();
}

ForwardTrace forward_trace(const MlpParams& params, std::span<const double> features) {
    if (features.size() != params.input_dim)
        throw Error(ErrorCode::DimensionMismatch,
                    "feature dimension " + std::to_string(features.size()) +
                        ", head expects " + std::to_string(params.input_dim));
    ForwardTrace t;
    t.hidden_pre.resize(params.hidden_dim);
    t.hidden.resize(params.hidden_dim);
    for (std::size_t j = 0; j < params.hidden_dim; ++j) {
        double acc = params.b1[j];
        const double* wrow = params.w1.data() + j * params.input_dim;
        for (std::size_t i = 0; i < params.input_dim; ++i) acc += wrow[i] * features[i];
        t.hidden_pre[j] = acc;
        t.hidden[j] = acc > 0.0 ? acc : 0.0;
    }
    t.output.resize(params.output_dim);
    for (std::size_t j = 0; j < params.output_dim; ++j) {
        double acc = params.b2[j];
        const double* wrow = params.w2.data() + j * params.hidden_dim;
        for (std::size_t i = 0; i < params.hidden_dim; ++i) acc += wrow[i] * t.hidden[i];
        t.output[j] = acc;
    }
    t.output_norm = l2_norm(t.output);
    t.embedding = normalize(t.output);  // throws ZeroVector on a dead head
    return t;
}

UnitEmbedding forward(const MlpParams& params, std::span<const double> features) {
    return forward_trace(params, features).embedding;
}

UnitEmbedding forward(const MlpParams& params, std::span<const float> features) {
    return forward(params, std::span<const double>(to_double(features)));
}

double cosine_annealed_lr(const TrainerConfig& cfg, std::size_t epoch) {
    if (cfg.epochs <= 1) return cfg.learning_rate;
    const double progress =
        static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return cfg.lr_floor +
           0.5 * (cfg.learning_rate - cfg.lr_floor) * (1.0 + std::cos(M_PI * progress));
}

TrainedHead train_heads(const SampleManifest& manifest, const FeatureMatrix& features,
                        const TrainerConfig& cfg, const EpochCallback& on_epoch) {
    std::vector<PairIndices> pairs;
    for (const Sample& s : manifest.samples) {
        if (s.labeled()) continue;
        if (!s.recon_row)
            throw Error(ErrorCode::UnpairedSample,
                        "sample '" + s.id + "' has no reconstruction row");
        pairs.push_back({s.feature_row, *s.recon_row});
    }
    return train_heads(features, pairs, cfg, on_epoch);
}

TrainedHead train_heads(const FeatureMatrix& features,
                        const std::vector<PairIndices>& pairs,
                        const TrainerConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    if (pairs.empty())
        throw Error(ErrorCode::EmptyBatch, "no original/reconstruction pairs to train on");
    for (const PairIndices& p : pairs) {
        if (p.original_row >= features.rows || p.recon_row >= features.rows)
            throw Error(ErrorCode::DanglingRowIndex,
                        "pair row index outside feature matrix");
    }

    Rng seeder(cfg.seed);
    Rng init_rng(seeder.derive(1));
    Rng shuffle_rng(seeder.derive(2));

    TrainedHead head;
    head.config = cfg;
    head.student =
        MlpParams::seeded(features.cols, cfg.hidden_dim, cfg.embed_dim, init_rng);
    head.teacher = head.student;  // exact copy at step 0

    AdamState adam_w1(head.student.w1.size());
    AdamState adam_b1(head.student.b1.size());
    AdamState adam_w2(head.student.w2.size());
    AdamState adam_b2(head.student.b2.size());

    const std::size_t n = pairs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> grad_w1(head.student.w1.size());
    std::vector<double> grad_b1(head.student.b1.size());
    std::vector<double> grad_w2(head.student.w2.size());
    std::vector<double> grad_b2(head.student.b2.size());

    head.loss_history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_annealed_lr(cfg, epoch);
        shuffle_rng.shuffle(order);
        double epoch_loss_sum = 0.0;

        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const std::size_t batch = stop - start;

            std::vector<UnitEmbedding> teacher_batch;
            std::vector<UnitEmbedding> student_batch;
            std::vector<ForwardTrace> traces;
            teacher_batch.reserve(batch);
            student_batch.reserve(batch);
            traces.reserve(batch);
            for (std::size_t b = start; b < stop; ++b) {
                const PairIndices& pair = pairs[order[b]];
                const auto original = features.row_as_double(pair.original_row);
                const auto recon = features.row_as_double(pair.recon_row);
                teacher_batch.push_back(forward(head.teacher, original));
                traces.push_back(forward_trace(head.student, recon));
                student_batch.push_back(traces.back().embedding);
            }

            // Single source of truth for the recorded loss.
            const double batch_loss = angular_loss(teacher_batch, student_batch, cfg.loss);
            if (!std::isfinite(batch_loss))
                throw Error(ErrorCode::NonFiniteLoss,
                            "training diverged at epoch " + std::to_string(epoch));
            epoch_loss_sum += batch_loss * static_cast<double>(batch);

            std::fill(grad_w1.begin(), grad_w1.end(), 0.0);
            std::fill(grad_b1.begin(), grad_b1.end(), 0.0);
            std::fill(grad_w2.begin(), grad_w2.end(), 0.0);
            std::fill(grad_b2.begin(), grad_b2.end(), 0.0);

            const double inv_batch = 1.0 / static_cast<double>(batch);
            for (std::size_t b = 0; b < batch; ++b) {
                const ForwardTrace& trace = traces[b];
                auto grads =
                    angular_loss_grad(teacher_batch[b], student_batch[b], cfg.loss);
                // Student side only; the teacher receives no gradient.
                std::vector<double> grad_output = normalize_pullback(
                    trace.embedding, trace.output_norm, grads.second);

                const PairIndices& pair = pairs[order[b]];
                const auto recon = features.row_as_double(pair.recon_row);
                for (std::size_t j = 0; j < head.student.output_dim; ++j) {
                    const double go = grad_output[j] * inv_batch;
                    grad_b2[j] += go;
                    double* wrow = grad_w2.data() + j * head.student.hidden_dim;
                    for (std::size_t i = 0; i < head.student.hidden_dim; ++i)
                        wrow[i] += go * trace.hidden[i];
                }
                for (std::size_t i = 0; i < head.student.hidden_dim; ++i) {
                    if (trace.hidden_pre[i] <= 0.0) continue;  // ReLU gate
                    double gh = 0.0;
                    for (std::size_t j = 0; j < head.student.output_dim; ++j)
                        gh += head.student.w2[j * head.student.hidden_dim + i] *
                              grad_output[j];
                    gh *= inv_batch;
                    grad_b1[i] += gh;
                    double* wrow = grad_w1.data() + i * head.student.input_dim;
                    for (std::size_t k = 0; k < head.student.input_dim; ++k)
                        wrow[k] += gh * recon[k];
                }
            }

            adam_step(head.student.w1, grad_w1, adam_w1, lr);
            adam_step(head.student.b1, grad_b1, adam_b1, lr);
            adam_step(head.student.w2, grad_w2, adam_w2, lr);
            adam_step(head.student.b2, grad_b2, adam_b2, lr);

            ema_update(head.teacher.w1, head.student.w1, cfg.ema_momentum);
            ema_update(head.teacher.b1, head.student.b1, cfg.ema_momentum);
            ema_update(head.teacher.w2, head.student.w2, cfg.ema_momentum);
            ema_update(head.teacher.b2, head.student.b2, cfg.ema_momentum);
        }

        head.loss_history.push_back(epoch_loss_sum / static_cast<double>(n));
        if (on_epoch) on_epoch(epoch, head.loss_history.back());
    }
    return head;
}

EmbeddingSet embed_rows(const TrainedHead& head, const FeatureMatrix& features,
                        std::span<const std::uint32_t> rows, HeadSide side,
                        int threads) {
    const MlpParams& params =
        side == HeadSide::Student ? head.student : head.teacher;
    if (features.rows > 0 && features.cols != params.input_dim)
        throw Error(ErrorCode::DimensionMismatch,
                    "feature dimension " + std::to_string(features.cols) +
                        ", head expects " + std::to_string(params.input_dim));
    for (std::uint32_t r : rows)
        if (r >= features.rows)
            throw Error(ErrorCode::DanglingRowIndex, "row " + std::to_string(r));

    EmbeddingSet out(rows.size(), params.output_dim);
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const auto z = forward(params, features.row(rows[i]));
        std::copy(z.begin(), z.end(), out.row(i).begin());
    });
    return out;
}

EmbeddingSet embed_all(const TrainedHead& head, const FeatureMatrix& features,
                       HeadSide side, int threads) {
    std::vector<std::uint32_t> rows(features.rows);
    std::iota(rows.begin(), rows.end(), 0u);
    return embed_rows(head, features, rows, side, threads);
}

}  // namespace spheresel
