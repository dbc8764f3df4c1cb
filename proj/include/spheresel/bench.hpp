#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spheresel/selection.hpp"
#include "spheresel/tinynet.hpp"
#include "spheresel/types.hpp"

namespace spheresel {

// Desk-scale benchmark harness: a seeded multi-domain synthetic generator,
// baseline acquisition strategies, a linear downstream classifier, and
// accuracy-vs-budget reporting.

struct SyntheticSpec {
    std::size_t n_target_domains = 2;
    std::size_t samples_per_domain = 200;
    std::size_t feature_dim = 16;
    double shift_magnitude = 2.5;   // per-domain mean offset length
    double class_separation = 4.0;  // distance between class means
    double label_noise = 0.0;       // probability a stored label is flipped
    std::uint64_t seed = 42;

    void validate() const;
};

struct SyntheticData {
    FeatureMatrix features;
    SampleManifest manifest;  // source + test labeled, selection pools not
    std::map<std::string, Label> pool_labels;  // answer key for the pools
    std::string source_domain = "source";
};

// Gaussian class clusters per domain with seeded shifts; each target domain
// is split 90/10 into an unlabeled selection pool and a labeled test set.
SyntheticData generate(const SyntheticSpec& spec);

struct ClassifierConfig {
    std::size_t pretrain_iters = 400;
    double pretrain_lr = 0.05;
    std::size_t finetune_iters = 200;
    double finetune_lr = 0.05;
};

// Binary logistic classifier on raw features; p is P(malignant).
struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;

    double predict_proba(std::span<const float> x) const;
};

LogisticModel pretrain_on_source(const SyntheticData& data, const ClassifierConfig& cfg);

enum class Strategy { Random, Margin, Entropy, FarthestFirst, DualScore };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& text);

// --- low-level pool orderings (most preferred first) ---

// Seeded uniform order without replacement.
std::vector<std::size_t> random_order(std::size_t n, std::uint64_t seed);
// Ascending |p - 0.5|: max-entropy first for a binary classifier.
std::vector<std::size_t> entropy_order(std::span<const double> probs);
// Ascending top1-top2 probability margin (same as entropy for two classes,
// kept separate because ties resolve identically but semantics differ).
std::vector<std::size_t> margin_order(std::span<const double> probs);
// Greedy max-min Euclidean coreset order; when reference rows are given, the
// first pick maximizes the distance to them, otherwise to the pool centroid.
std::vector<std::size_t> farthest_first_order(const FeatureMatrix& features,
                                              std::span<const std::uint32_t> pool_rows,
                                              std::span<const std::uint32_t> reference_rows);

// Budget-sized id set for one baseline strategy. The probability-based
// strategies need the source-pretrained classifier.
std::vector<std::string> baseline_select(Strategy strategy, const SyntheticData& data,
                                         const LogisticModel* source_model,
                                         double alpha_percent, std::uint64_t seed);

// Reveals the labels of the selected pool samples, fine-tunes the
// source-pretrained classifier on them, and reports accuracy on the union of
// target test splits.
double evaluate(const SyntheticData& data, const LogisticModel& pretrained,
                const std::vector<std::string>& selected_ids,
                const ClassifierConfig& cfg);
double evaluate(const SyntheticData& data, const std::vector<std::string>& selected_ids,
                const ClassifierConfig& cfg);

struct BenchCell {
    std::string strategy;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
};

struct BenchAggregate {
    std::string strategy;
    double alpha = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct BenchResult {
    std::vector<BenchCell> cells;
    std::vector<BenchAggregate> aggregates() const;
};

struct BenchConfig {
    SyntheticSpec spec;
    std::vector<double> alphas = {20.0, 30.0, 50.0, 80.0};
    std::size_t n_seeds = 20;
    std::vector<Strategy> strategies = {Strategy::Random, Strategy::Margin,
                                        Strategy::Entropy, Strategy::FarthestFirst,
                                        Strategy::DualScore};
    bool include_full = false;  // adds the alpha = 100 upper-bound rows
    ClassifierConfig classifier;
    TrainerConfig head;      // desk-scale projection-head settings
    std::size_t cluster_k = 4;
    ScoringConfig scoring;   // alpha_percent is overridden per cell
    double proxy_lambda = 1.0;

    BenchConfig() {
        head.epochs = 30;
        head.learning_rate = 1e-3;
        head.batch_size = 32;
        head.hidden_dim = 32;
        head.embed_dim = 8;
    }
};

// Runs every (strategy, alpha, seed) cell with paired seeds: all strategies
// see the same synthetic draw for a given seed.
BenchResult run_bench(const BenchConfig& cfg);

// The full preference order the dual-score pipeline induces on the pool for
// one synthetic draw (head training + clustering + scoring).
std::vector<std::string> dual_score_order(const SyntheticData& data,
                                          const BenchConfig& cfg, std::uint64_t seed);

void write_bench_csv(const BenchResult& result, std::ostream& out);
void write_bench_summary_csv(const BenchResult& result, std::ostream& out);

// Soft-property scan: per strategy, flags mean-accuracy drops of more than
// two standard errors between consecutive budgets. Returned as messages, not
// failures.
std::vector<std::string> monotonicity_flags(const BenchResult& result);

// One-sided paired sign test: probability of >= `wins` successes out of
// wins + losses fair coin flips (ties dropped beforehand).
double paired_sign_test_p(std::size_t wins, std::size_t losses);

}  // namespace spheresel
