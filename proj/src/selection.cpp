#include "spheresel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "spheresel/dataio.hpp"
#include "spheresel/geometry.hpp"
#include "spheresel/parallel.hpp"

namespace spheresel {

const char* uncertainty_mode_name(UncertaintyMode mode) {
    return mode == UncertaintyMode::PairwiseMin ? "pairwise_min" : "range";
}

const char* combine_mode_name(CombineMode mode) {
    return mode == CombineMode::Raw ? "raw" : "rank";
}

UncertaintyMode parse_uncertainty_mode(const std::string& text) {
    if (text == "pairwise_min") return UncertaintyMode::PairwiseMin;
    if (text == "range") return UncertaintyMode::Range;
    throw Error(ErrorCode::Parse, "unknown uncertainty mode '" + text + "'");
}

CombineMode parse_combine_mode(const std::string& text) {
    if (text == "raw") return CombineMode::Raw;
    if (text == "rank") return CombineMode::Rank;
    throw Error(ErrorCode::Parse, "unknown combine mode '" + text + "'");
}

void ScoringConfig::validate() const {
    if (!(alpha_percent > 0.0 && alpha_percent < 100.0))
        throw Error(ErrorCode::InvalidConfig, "alpha_percent must be in (0, 100)");
    if (!std::isfinite(omega))
        throw Error(ErrorCode::InvalidConfig, "omega must be finite");
}

double uncertainty_score(std::span<const double> thetas, UncertaintyMode mode) {
    if (thetas.size() < 2)
        throw Error(ErrorCode::TooFewCentroids,
                    "uncertainty needs k >= 2 centroid angles, got " +
                        std::to_string(thetas.size()));
    if (mode == UncertaintyMode::Range) {
        const auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
        return *hi - *lo;
    }
    // Min pairwise gap: sort a copy, then scan adjacent differences.
    std::vector<double> sorted(thetas.begin(), thetas.end());
    std::sort(sorted.begin(), sorted.end());
    double best = sorted[1] - sorted[0];
    for (std::size_t i = 2; i < sorted.size(); ++i)
        best = std::min(best, sorted[i] - sorted[i - 1]);
    return best;
}

double representativeness_score(std::span<const double> z_u,
                                std::span<const double> z_r) {
    return spherical_distance(z_u, z_r);
}

double informativeness(double u, double r, double omega) {
    return u + omega * r;
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j);  // mean of positions i..j
        for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::vector<double> combine_scores(std::span<const double> uncertainty,
                                   std::span<const double> representativeness,
                                   const ScoringConfig& cfg) {
    if (uncertainty.size() != representativeness.size())
        throw Error(ErrorCode::DimensionMismatch, "score vectors differ in length");
    const std::size_t n = uncertainty.size();
    std::vector<double> out(n);
    if (cfg.combine_mode == CombineMode::Raw) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = informativeness(uncertainty[i], representativeness[i], cfg.omega);
    } else {
        const auto u_ranks = fractional_ranks(uncertainty);
        const auto r_ranks = fractional_ranks(representativeness);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = informativeness(u_ranks[i], r_ranks[i], cfg.omega);
    }
    return out;
}

std::size_t selection_count(double alpha_percent, std::size_t n) {
    const double budget = std::floor(alpha_percent * static_cast<double>(n) / 100.0);
    const auto count = static_cast<std::size_t>(budget);
    return std::max<std::size_t>(1, count);
}

SelectionReport select(const SelectionInputs& inputs, const ClusterModel& model,
                       const ScoringConfig& cfg, int threads) {
    cfg.validate();
    const std::size_t n = inputs.pool.count;
    if (n == 0) throw Error(ErrorCode::EmptyPool, "selection pool is empty");
    if (inputs.ids.size() != n || inputs.domains.size() != n)
        throw Error(ErrorCode::DimensionMismatch,
                    "ids/domains do not match pool size");
    if (inputs.recon.count != n)
        throw Error(ErrorCode::UnpairedSample,
                    "pool has " + std::to_string(n) + " samples but " +
                        std::to_string(inputs.recon.count) + " reconstructions");
    if (inputs.pool.dim != model.dim || inputs.recon.dim != inputs.pool.dim)
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding/centroid dimensions disagree");

    std::vector<double> u(n), r(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto thetas = angles_to_centroids(model, inputs.pool.row(i));
        u[i] = uncertainty_score(thetas, cfg.uncertainty_mode);
        r[i] = representativeness_score(inputs.pool.row(i), inputs.recon.row(i));
    });
    const std::vector<double> informative = combine_scores(u, r, cfg);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (informative[a] != informative[b]) return informative[a] < informative[b];
        return inputs.ids[a] < inputs.ids[b];
    });

    const std::size_t budget = selection_count(cfg.alpha_percent, n);
    SelectionReport report;
    report.config = cfg;
    report.pool_size = n;
    report.rows.reserve(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t i = order[pos];
        SelectionRow row;
        row.id = inputs.ids[i];
        row.domain = inputs.domains[i];
        row.uncertainty = u[i];
        row.representativeness = r[i];
        row.informativeness = informative[i];
        row.rank = static_cast<std::uint32_t>(pos);
        row.selected = pos < budget;
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_selection_csv(const SelectionReport& report, std::ostream& out) {
    out << "id,domain,uncertainty,representativeness,informativeness,rank,selected\n";
    for (const SelectionRow& row : report.rows) {
        out << row.id << ',' << row.domain << ',' << format_real(row.uncertainty)
            << ',' << format_real(row.representativeness) << ','
            << format_real(row.informativeness) << ',' << row.rank << ','
            << (row.selected ? 1 : 0) << '\n';
    }
}

}  // namespace spheresel
