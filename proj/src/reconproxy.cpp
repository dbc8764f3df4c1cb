#include "spheresel/reconproxy.hpp"

#include <cmath>

#include "spheresel/geometry.hpp"

namespace spheresel {

void ProxyConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "proxy lambda must be in [0, 1]");
    for (const auto& [domain, map] : maps) {
        const std::size_t d = map.offset.size();
        if (d == 0)
            throw Error(ErrorCode::InvalidConfig,
                        "proxy map for '" + domain + "' has empty offset");
        if (!map.matrix.empty() && map.matrix.size() != d * d)
            throw Error(ErrorCode::InvalidConfig,
                        "proxy map matrix for '" + domain + "' is not " +
                            std::to_string(d) + "x" + std::to_string(d));
    }
}

std::vector<float> proxy_reconstruct(std::span<const float> features,
                                     const std::string& domain,
                                     const ProxyConfig& cfg) {
    const auto it = cfg.maps.find(domain);
    if (it == cfg.maps.end())
        throw Error(ErrorCode::UnknownDomain, "no proxy map for domain '" + domain + "'");
    const AffineMap& map = it->second;
    const std::size_t d = features.size();
    if (map.offset.size() != d)
        throw Error(ErrorCode::DimensionMismatch,
                    "proxy map for '" + domain + "' expects dimension " +
                        std::to_string(map.offset.size()));

    std::vector<float> out(d);
    for (std::size_t i = 0; i < d; ++i) {
        double mapped = map.offset[i];
        if (map.matrix.empty()) {
            mapped += features[i];
        } else {
            const double* row = map.matrix.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) mapped += row[j] * features[j];
        }
        const double blended =
            (1.0 - cfg.lambda) * static_cast<double>(features[i]) + cfg.lambda * mapped;
        out[i] = static_cast<float>(blended);
    }
    return out;
}

ProxyConfig fit_mean_match_maps(const FeatureMatrix& features,
                                const SampleManifest& manifest,
                                const std::string& source_domain, double lambda) {
    const std::size_t d = features.cols;
    std::map<std::string, std::vector<double>> sums;
    std::map<std::string, std::size_t> counts;
    for (const Sample& s : manifest.samples) {
        auto& sum = sums[s.domain];
        if (sum.empty()) sum.assign(d, 0.0);
        auto row = features.row(s.feature_row);
        for (std::size_t i = 0; i < d; ++i) sum[i] += row[i];
        ++counts[s.domain];
    }
    const auto source_it = sums.find(source_domain);
    if (source_it == sums.end())
        throw Error(ErrorCode::UnknownDomain,
                    "source domain '" + source_domain + "' has no samples");
    std::vector<double> source_mean(d);
    for (std::size_t i = 0; i < d; ++i)
        source_mean[i] = source_it->second[i] / static_cast<double>(counts[source_domain]);

    ProxyConfig cfg;
    cfg.lambda = lambda;
    for (const auto& [domain, sum] : sums) {
        AffineMap map;
        map.offset.resize(d);
        const double n = static_cast<double>(counts[domain]);
        for (std::size_t i = 0; i < d; ++i) map.offset[i] = source_mean[i] - sum[i] / n;
        cfg.maps.emplace(domain, std::move(map));
    }
    cfg.validate();
    return cfg;
}

void materialize_recon_rows(FeatureMatrix& features, SampleManifest& manifest,
                            const ReconstructionProvider& provider) {
    for (Sample& s : manifest.samples) {
        if (s.labeled() || s.recon_row) continue;
        const auto recon = provider.reconstruct(features.row(s.feature_row), s.domain);
        s.recon_row = features.rows;
        features.append_row(recon);
    }
}

namespace {

DomainStats summarize(const std::string& name, std::vector<double> similarities,
                      double source_mean) {
    DomainStats stats;
    stats.domain = name;
    stats.count = similarities.size();
    double sum = 0.0;
    for (double s : similarities) sum += s;
    stats.mean = sum / static_cast<double>(stats.count);
    double sq = 0.0;
    for (double s : similarities) sq += (s - stats.mean) * (s - stats.mean);
    stats.stddev = std::sqrt(sq / static_cast<double>(stats.count));
    stats.bias = std::abs(stats.mean - source_mean);
    stats.similarities = std::move(similarities);
    return stats;
}

std::vector<double> similarities_to(const FeatureMatrix& set,
                                    const UnitEmbedding& centroid) {
    std::vector<double> out(set.rows);
    for (std::size_t i = 0; i < set.rows; ++i) {
        const auto row = set.row_as_double(i);
        out[i] = dot(normalize(row), centroid);
    }
    return out;
}

}  // namespace

DomainBiasReport domain_bias(
    const FeatureMatrix& source_features,
    const std::vector<std::pair<std::string, FeatureMatrix>>& target_sets,
    const std::string& source_name) {
    if (source_features.rows == 0)
        throw Error(ErrorCode::EmptySet, "source feature set is empty");
    for (const auto& [name, set] : target_sets)
        if (set.rows == 0)
            throw Error(ErrorCode::EmptySet, "target set '" + name + "' is empty");

    // Centroid of the source cloud on the unit sphere.
    std::vector<double> sum(source_features.cols, 0.0);
    for (std::size_t i = 0; i < source_features.rows; ++i) {
        const auto unit = normalize(source_features.row_as_double(i));
        for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += unit[c];
    }
    const UnitEmbedding centroid = normalize(sum);

    DomainBiasReport report;
    auto source_sims = similarities_to(source_features, centroid);
    double source_sum = 0.0;
    for (double s : source_sims) source_sum += s;
    const double source_mean = source_sum / static_cast<double>(source_sims.size());

    report.source = summarize(source_name, std::move(source_sims), source_mean);
    for (const auto& [name, set] : target_sets)
        report.targets.push_back(
            summarize(name, similarities_to(set, centroid), source_mean));
    return report;
}

}  // namespace spheresel
