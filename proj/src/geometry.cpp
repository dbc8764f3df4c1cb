#include "spheresel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spheresel {

namespace {

void require_same_dim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "vector dimensions " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
}

}  // namespace

void LossConfig::validate() const {
    if (!(m > 0.0))
        throw Error(ErrorCode::InvalidConfig, "loss scaling m must be > 0");
    if (!(eps_clamp > 0.0 && eps_clamp < 1e-3))
        throw Error(ErrorCode::InvalidConfig, "eps_clamp must be in (0, 1e-3)");
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double l2_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

UnitEmbedding normalize(std::span<const double> v) {
    if (v.size() < 2)
        throw Error(ErrorCode::DimensionMismatch,
                    "embeddings need dimension >= 2, got " + std::to_string(v.size()));
    const double norm = l2_norm(v);
    if (!(norm > kZeroNormThreshold))
        throw Error(ErrorCode::ZeroVector,
                    "vector norm " + std::to_string(norm) + " is at or below 1e-12");
    UnitEmbedding out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
    return out;
}

double clamped_cosine(std::span<const double> a, std::span<const double> b,
                      double eps_clamp) {
    const double s = dot(a, b);
    return std::clamp(s, -1.0 + eps_clamp, 1.0 - eps_clamp);
}

double spherical_distance(std::span<const double> a, std::span<const double> b,
                          double eps_clamp) {
    return std::acos(clamped_cosine(a, b, eps_clamp));
}

double angular_loss_pair(std::span<const double> f, std::span<const double> g,
                         const LossConfig& cfg) {
    // Eq-style cosine: re-divide by the norms rather than trusting the unit
    // precondition, so slightly denormalized inputs still give the right angle.
    require_same_dim(f, g);
    const double nf = l2_norm(f);
    const double ng = l2_norm(g);
    if (!(nf > kZeroNormThreshold) || !(ng > kZeroNormThreshold))
        throw Error(ErrorCode::ZeroVector, "angular loss on near-zero vector");
    const double s =
        std::clamp(dot(f, g) / (nf * ng), -1.0 + cfg.eps_clamp, 1.0 - cfg.eps_clamp);
    const double theta = std::acos(s);
    return theta * theta;  // caller applies m^2
}

double angular_loss(const std::vector<UnitEmbedding>& f_batch,
                    const std::vector<UnitEmbedding>& g_batch,
                    const LossConfig& cfg) {
    cfg.validate();
    if (f_batch.empty() || g_batch.empty())
        throw Error(ErrorCode::EmptyBatch, "angular loss on empty batch");
    if (f_batch.size() != g_batch.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "batch sizes " + std::to_string(f_batch.size()) + " vs " +
                        std::to_string(g_batch.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < f_batch.size(); ++i)
        acc += angular_loss_pair(f_batch[i], g_batch[i], cfg);
    return cfg.m * cfg.m * (acc / static_cast<double>(f_batch.size()));
}

std::pair<std::vector<double>, std::vector<double>> angular_loss_grad(
    std::span<const double> f, std::span<const double> g, const LossConfig& cfg) {
    cfg.validate();
    require_same_dim(f, g);
    const std::size_t d = f.size();
    const double raw = dot(f, g);
    if (raw >= 1.0 - cfg.eps_clamp || raw <= -1.0 + cfg.eps_clamp) {
        // Inside the clamp region the loss is locally constant, so the true
        // gradient is zero. Returning it exactly keeps Adam from amplifying
        // rounding noise at the pairwise optimum.
        return {std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    }
    const double theta = std::acos(raw);
    const double coeff = -2.0 * cfg.m * cfg.m * theta / std::sqrt(1.0 - raw * raw);

    // dL/df = coeff * g, projected onto the tangent space at f (and the
    // mirror image for g). raw_norm is 1 here: inputs are unit embeddings.
    std::vector<double> grad_f(d), grad_g(d);
    double ff = 0.0, gg = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        ff += f[i] * f[i];
        gg += g[i] * g[i];
    }
    for (std::size_t i = 0; i < d; ++i) {
        grad_f[i] = coeff * (g[i] - f[i] * (raw / ff));
        grad_g[i] = coeff * (f[i] - g[i] * (raw / gg));
    }
    return {std::move(grad_f), std::move(grad_g)};
}

std::vector<double> normalize_pullback(std::span<const double> z, double raw_norm,
                                       std::span<const double> grad_z) {
    require_same_dim(z, grad_z);
    const double zg = dot(z, grad_z);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = (grad_z[i] - z[i] * zg) / raw_norm;
    return out;
}

}  // namespace spheresel
