#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spheresel/types.hpp"

namespace spheresel {

// Stand-in for the upstream image-reconstruction stage: an interface for
// supplying reconstruction features, a deterministic affine homogenization
// proxy, and cross-domain similarity analytics.

struct AffineMap {
    std::vector<double> offset;  // b_d, length = feature dim
    std::vector<double> matrix;  // A_d row-major d*d; empty means identity
};

struct ProxyConfig {
    double lambda = 1.0;  // blend toward the mapped point; 0 is identity
    std::map<std::string, AffineMap> maps;  // keyed by domain tag

    void validate() const;
};

// (1 - lambda) * x + lambda * (A_d x + b_d) for the sample's domain.
std::vector<float> proxy_reconstruct(std::span<const float> features,
                                     const std::string& domain,
                                     const ProxyConfig& cfg);

// Behavioral interface: reconstruction features for a raw feature vector.
class ReconstructionProvider {
public:
    virtual ~ReconstructionProvider() = default;
    virtual std::vector<float> reconstruct(std::span<const float> features,
                                           const std::string& domain) const = 0;
};

class ProxyProvider : public ReconstructionProvider {
public:
    explicit ProxyProvider(ProxyConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    std::vector<float> reconstruct(std::span<const float> features,
                                   const std::string& domain) const override {
        return proxy_reconstruct(features, domain, cfg_);
    }

    const ProxyConfig& config() const { return cfg_; }

private:
    ProxyConfig cfg_;
};

// Identity-matrix maps with offset = source mean - domain mean, fitted from
// the manifest's original rows. With lambda = 1 each target domain's feature
// mean lands exactly on the source mean.
ProxyConfig fit_mean_match_maps(const FeatureMatrix& features,
                                const SampleManifest& manifest,
                                const std::string& source_domain, double lambda);

// Appends provider-generated reconstruction rows for every unlabeled sample
// that lacks one and fills in its recon_row.
void materialize_recon_rows(FeatureMatrix& features, SampleManifest& manifest,
                            const ReconstructionProvider& provider);

struct DomainStats {
    std::string domain;
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population
    double bias = 0.0;    // |mean - source mean|
    std::vector<double> similarities;  // raw per-sample values for KDE plots
};

struct DomainBiasReport {
    DomainStats source;
    std::vector<DomainStats> targets;
};

// Cosine similarity of every sample to the source centroid (the normalized
// mean of the normalized source features), summarized per domain.
DomainBiasReport domain_bias(
    const FeatureMatrix& source_features,
    const std::vector<std::pair<std::string, FeatureMatrix>>& target_sets,
    const std::string& source_name = "source");

}  // namespace spheresel
