#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spheresel/clustering.hpp"
#include "spheresel/types.hpp"

namespace spheresel {

// Dual-score informativeness over the multi-domain unlabeled pool: an
// uncertainty score from the centroid angles, a representativeness score
// from the sample/reconstruction angular gap, and top-alpha% selection in a
// single pass.

enum class UncertaintyMode { PairwiseMin, Range };
enum class CombineMode { Raw, Rank };

const char* uncertainty_mode_name(UncertaintyMode mode);
const char* combine_mode_name(CombineMode mode);
UncertaintyMode parse_uncertainty_mode(const std::string& text);
CombineMode parse_combine_mode(const std::string& text);

struct ScoringConfig {
    double omega = 1.0;  // weight of the representativeness term; sign is the
                         // caller's lever for preferring low or high divergence
    UncertaintyMode uncertainty_mode = UncertaintyMode::PairwiseMin;
    CombineMode combine_mode = CombineMode::Raw;
    double alpha_percent = 20.0;

    void validate() const;
};

// pairwise_min: min over p != q of |theta_p - theta_q|; range: max - min.
// Smaller value means higher uncertainty in both modes.
double uncertainty_score(std::span<const double> thetas, UncertaintyMode mode);

// Angular distance between a sample's embedding and its reconstruction's.
double representativeness_score(std::span<const double> z_u,
                                std::span<const double> z_r);

// Raw combination I = u + omega * r.
double informativeness(double u, double r, double omega);

// 0-based ascending fractional ranks, ties get the average rank.
std::vector<double> fractional_ranks(std::span<const double> values);

// Per-sample informativeness over the whole pool; rank mode replaces the
// scores with their pool-wide fractional ranks before combining.
std::vector<double> combine_scores(std::span<const double> uncertainty,
                                   std::span<const double> representativeness,
                                   const ScoringConfig& cfg);

// max(1, floor(alpha/100 * n)) for n >= 1.
std::size_t selection_count(double alpha_percent, std::size_t n);

struct SelectionRow {
    std::string id;
    std::string domain;
    double uncertainty = 0.0;
    double representativeness = 0.0;
    double informativeness = 0.0;
    std::uint32_t rank = 0;  // 0 = most informative
    bool selected = false;
};

struct SelectionReport {
    std::vector<SelectionRow> rows;  // sorted by rank
    ScoringConfig config;
    std::size_t pool_size = 0;
};

struct SelectionInputs {
    std::vector<std::string> ids;
    std::vector<std::string> domains;
    EmbeddingSet pool;   // student embeddings of the unlabeled samples
    EmbeddingSet recon;  // student embeddings of their reconstructions, row-aligned
};

// Scores the pool, sorts ascending by informativeness (ties by ascending
// sample id), and marks the top-alpha% budget as selected. Single pass, no
// iterative rounds.
SelectionReport select(const SelectionInputs& inputs, const ClusterModel& model,
                       const ScoringConfig& cfg, int threads = 1);

// CSV export: id,domain,uncertainty,representativeness,informativeness,rank,selected
void write_selection_csv(const SelectionReport& report, std::ostream& out);

}  // namespace spheresel
