#pragma once

#include <span>
#include <utility>
#include <vector>

#include "spheresel/errors.hpp"

namespace spheresel {

// Unit-hypersphere primitives shared by every other module. All functions
// are pure and safe to call concurrently.

// A vector of unit L2 norm. Producers are normalize() and the projection
// heads; consumers treat unit norm as a precondition.
using UnitEmbedding = std::vector<double>;

struct LossConfig {
    double m = 4.0;            // angular scaling factor
    double eps_clamp = 1e-7;   // keeps arccos and its derivative finite at +-1

    void validate() const;
};

inline constexpr double kDefaultClampEps = 1e-7;
inline constexpr double kZeroNormThreshold = 1e-12;

// v scaled to unit L2 norm. Throws ZeroVector when the norm is at or below
// 1e-12, which signals degenerate features upstream.
UnitEmbedding normalize(std::span<const double> v);

// Cosine similarity clamped to [-1+eps, 1-eps].
double clamped_cosine(std::span<const double> a, std::span<const double> b,
                      double eps_clamp = kDefaultClampEps);

// Angular distance arccos(a . b) in [0, pi]. Inputs must be unit norm.
double spherical_distance(std::span<const double> a, std::span<const double> b,
                          double eps_clamp = kDefaultClampEps);

// Mean over the batch of (m * arccos(cos_sim(f_i, g_i)))^2. The m^2 factor
// is applied once after averaging, so scaling m scales the loss exactly.
double angular_loss(const std::vector<UnitEmbedding>& f_batch,
                    const std::vector<UnitEmbedding>& g_batch,
                    const LossConfig& cfg);

double angular_loss_pair(std::span<const double> f, std::span<const double> g,
                         const LossConfig& cfg);

// Gradient of the single-pair loss with respect to the pre-normalization
// vectors of f and g, evaluated at unit scale. With s = clamp(f . g),
//   dL/ds = -2 m^2 arccos(s) / sqrt(1 - s^2),
// and the normalization Jacobian (I - zz^T)/||v|| projects the downstream
// gradient onto the tangent space. Finite everywhere thanks to the clamp.
std::pair<std::vector<double>, std::vector<double>> angular_loss_grad(
    std::span<const double> f, std::span<const double> g, const LossConfig& cfg);

// Pulls a gradient w.r.t. the unit vector z back through normalize() to the
// raw vector v, where z = v/raw_norm: returns (g - z (z.g)) / raw_norm.
std::vector<double> normalize_pullback(std::span<const double> z, double raw_norm,
                                       std::span<const double> grad_z);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

}  // namespace spheresel
