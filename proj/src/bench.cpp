#include "spheresel/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "spheresel/clustering.hpp"
#include "spheresel/dataio.hpp"
#include "spheresel/reconproxy.hpp"
#include "spheresel/rng.hpp"

namespace spheresel {

namespace {

constexpr std::uint64_t kSaltDirections = 1;
constexpr std::uint64_t kSaltLabels = 2;
constexpr std::uint64_t kSaltSamples = 3;
constexpr std::uint64_t kSaltSplit = 4;
constexpr std::uint64_t kSaltRandomOrder = 5;
constexpr std::uint64_t kSaltHead = 6;
constexpr std::uint64_t kSaltCluster = 7;

std::vector<double> unit_direction(std::size_t dim, Rng& rng) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
        for (double& x : v) x = rng.normal();
        norm = 0.0;
        for (double x : v) norm += x * x;
    } while (norm <= 1e-24);
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

std::string padded_id(const std::string& domain, std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu", index);
    return domain + "-" + buf;
}

double sq_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

struct PoolView {
    std::vector<std::string> ids;
    std::vector<std::string> domains;
    std::vector<std::uint32_t> rows;
};

PoolView pool_view(const SyntheticData& data) {
    PoolView view;
    for (const std::size_t i : data.manifest.pool_indices()) {
        const Sample& s = data.manifest.samples[i];
        view.ids.push_back(s.id);
        view.domains.push_back(s.domain);
        view.rows.push_back(s.feature_row);
    }
    return view;
}

std::size_t budget_for(double alpha_percent, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::EmptyPool, "selection pool is empty");
    if (!(alpha_percent > 0.0 && alpha_percent <= 100.0))
        throw Error(ErrorCode::BudgetExceedsPool,
                    "alpha " + std::to_string(alpha_percent) + "% outside (0, 100]");
    const std::size_t budget = selection_count(alpha_percent, n);
    if (budget > n)
        throw Error(ErrorCode::BudgetExceedsPool,
                    "budget " + std::to_string(budget) + " > pool " + std::to_string(n));
    return budget;
}

LogisticModel train_logistic(const FeatureMatrix& features,
                             std::span<const std::uint32_t> rows,
                             std::span<const int> targets, std::size_t iters,
                             double lr, LogisticModel model) {
    const std::size_t d = features.cols;
    if (model.weights.empty()) model.weights.assign(d, 0.0);
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    std::vector<double> grad(d);
    for (std::size_t it = 0; it < iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto x = features.row(rows[i]);
            const double err = model.predict_proba(x) - static_cast<double>(targets[i]);
            for (std::size_t c = 0; c < d; ++c) grad[c] += err * x[c];
            grad_b += err;
        }
        for (std::size_t c = 0; c < d; ++c) model.weights[c] -= lr * inv_n * grad[c];
        model.bias -= lr * inv_n * grad_b;
    }
    return model;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n_target_domains < 1 || samples_per_domain < 1 || feature_dim < 2)
        throw Error(ErrorCode::InvalidConfig,
                    "synthetic spec counts must be >= 1 (feature_dim >= 2)");
    if (samples_per_domain < 2)
        throw Error(ErrorCode::InvalidConfig,
                    "need at least 2 samples per domain for a pool/test split");
    if (!(label_noise >= 0.0 && label_noise < 0.5))
        throw Error(ErrorCode::InvalidConfig, "label_noise must be in [0, 0.5)");
    if (!(shift_magnitude >= 0.0) || !(class_separation >= 0.0))
        throw Error(ErrorCode::InvalidConfig, "shift and separation must be >= 0");
}

SyntheticData generate(const SyntheticSpec& spec) {
    spec.validate();
    Rng master(spec.seed);
    Rng dir_rng(master.derive(kSaltDirections));
    Rng label_rng(master.derive(kSaltLabels));
    Rng sample_rng(master.derive(kSaltSamples));
    Rng split_rng(master.derive(kSaltSplit));

    const std::size_t d = spec.feature_dim;
    const std::vector<double> class_dir = unit_direction(d, dir_rng);

    std::vector<std::string> domains = {"source"};
    for (std::size_t t = 1; t <= spec.n_target_domains; ++t)
        domains.push_back("t" + std::to_string(t));

    std::map<std::string, std::vector<double>> shifts;
    shifts["source"] = std::vector<double>(d, 0.0);
    for (std::size_t t = 1; t < domains.size(); ++t) {
        auto dir = unit_direction(d, dir_rng);
        for (double& x : dir) x *= spec.shift_magnitude;
        shifts[domains[t]] = std::move(dir);
    }

    SyntheticData data;
    data.features = FeatureMatrix(0, static_cast<std::uint32_t>(d));

    for (const std::string& domain : domains) {
        const std::size_t n = spec.samples_per_domain;
        // Balanced true classes, order shuffled.
        std::vector<int> is_malignant(n, 0);
        for (std::size_t i = n / 2; i < n; ++i) is_malignant[i] = 1;
        label_rng.shuffle(is_malignant);

        std::vector<Label> observed(n);
        std::vector<std::uint32_t> rows(n);
        const std::vector<double>& shift = shifts[domain];
        for (std::size_t i = 0; i < n; ++i) {
            const double sign = is_malignant[i] ? 0.5 : -0.5;
            std::vector<float> x(d);
            for (std::size_t c = 0; c < d; ++c) {
                const double mean = shift[c] + sign * spec.class_separation * class_dir[c];
                x[c] = static_cast<float>(sample_rng.normal(mean, 1.0));
            }
            rows[i] = data.features.rows;
            data.features.append_row(x);
            bool flip = spec.label_noise > 0.0 && label_rng.uniform01() < spec.label_noise;
            const bool malignant = (is_malignant[i] != 0) != flip;
            observed[i] = malignant ? Label::Malignant : Label::Benign;
        }

        if (domain == data.source_domain) {
            for (std::size_t i = 0; i < n; ++i) {
                Sample s;
                s.id = padded_id(domain, i);
                s.domain = domain;
                s.feature_row = rows[i];
                s.label = observed[i];
                data.manifest.samples.push_back(std::move(s));
            }
            continue;
        }

        // 90/10 selection/test split, seeded.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        split_rng.shuffle(order);
        const std::size_t n_test = std::max<std::size_t>(1, n / 10);
        const std::size_t n_pool = n - n_test;
        for (std::size_t pos = 0; pos < n; ++pos) {
            const std::size_t i = order[pos];
            Sample s;
            s.id = padded_id(domain, i);
            s.domain = domain;
            s.feature_row = rows[i];
            if (pos < n_pool) {
                data.pool_labels.emplace(s.id, observed[i]);  // hidden answer key
            } else {
                s.label = observed[i];
            }
            data.manifest.samples.push_back(std::move(s));
        }
    }
    return data;
}

double LogisticModel::predict_proba(std::span<const float> x) const {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
    return 1.0 / (1.0 + std::exp(-z));
}

LogisticModel pretrain_on_source(const SyntheticData& data, const ClassifierConfig& cfg) {
    std::vector<std::uint32_t> rows;
    std::vector<int> targets;
    for (const Sample& s : data.manifest.samples) {
        if (s.domain != data.source_domain || !s.label) continue;
        rows.push_back(s.feature_row);
        targets.push_back(*s.label == Label::Malignant ? 1 : 0);
    }
    if (rows.empty())
        throw Error(ErrorCode::EmptySet, "no labeled source samples to pretrain on");
    return train_logistic(data.features, rows, targets, cfg.pretrain_iters,
                          cfg.pretrain_lr, LogisticModel{});
}

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Random: return "random";
        case Strategy::Margin: return "margin";
        case Strategy::Entropy: return "entropy";
        case Strategy::FarthestFirst: return "farthest_first";
        case Strategy::DualScore: return "dual_score";
    }
    return "?";
}

Strategy parse_strategy(const std::string& text) {
    for (Strategy s : {Strategy::Random, Strategy::Margin, Strategy::Entropy,
                       Strategy::FarthestFirst, Strategy::DualScore})
        if (text == strategy_name(s)) return s;
    throw Error(ErrorCode::Parse, "unknown strategy '" + text + "'");
}

std::vector<std::size_t> random_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    return order;
}

namespace {

std::vector<std::size_t> order_by_key(std::span<const double> keys) {
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    return order;
}

}  // namespace

std::vector<std::size_t> entropy_order(std::span<const double> probs) {
    std::vector<double> keys(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) keys[i] = std::abs(probs[i] - 0.5);
    return order_by_key(keys);
}

std::vector<std::size_t> margin_order(std::span<const double> probs) {
    std::vector<double> keys(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        keys[i] = std::abs(2.0 * probs[i] - 1.0);  // top1 - top2 for two classes
    return order_by_key(keys);
}

std::vector<std::size_t> farthest_first_order(const FeatureMatrix& features,
                                              std::span<const std::uint32_t> pool_rows,
                                              std::span<const std::uint32_t> reference_rows) {
    const std::size_t n = pool_rows.size();
    std::vector<double> min_dist(n);
    if (!reference_rows.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::uint32_t ref : reference_rows)
                best = std::min(best,
                                sq_distance(features.row(pool_rows[i]), features.row(ref)));
            min_dist[i] = best;
        }
    } else {
        std::vector<double> centroid(features.cols, 0.0);
        for (std::uint32_t r : pool_rows) {
            auto row = features.row(r);
            for (std::size_t c = 0; c < centroid.size(); ++c) centroid[c] += row[c];
        }
        for (double& c : centroid) c /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = features.row(pool_rows[i]);
            double acc = 0.0;
            for (std::size_t c = 0; c < centroid.size(); ++c) {
                const double diff = static_cast<double>(row[c]) - centroid[c];
                acc += diff * diff;
            }
            min_dist[i] = acc;
        }
    }

    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<bool> taken(n, false);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t pick = n;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            if (min_dist[i] > best) {
                best = min_dist[i];
                pick = i;
            }
        }
        taken[pick] = true;
        order.push_back(pick);
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            min_dist[i] = std::min(
                min_dist[i], sq_distance(features.row(pool_rows[i]),
                                         features.row(pool_rows[pick])));
        }
    }
    return order;
}

std::vector<std::string> baseline_select(Strategy strategy, const SyntheticData& data,
                                         const LogisticModel* source_model,
                                         double alpha_percent, std::uint64_t seed) {
    const PoolView pool = pool_view(data);
    const std::size_t budget = budget_for(alpha_percent, pool.ids.size());

    std::vector<std::size_t> order;
    switch (strategy) {
        case Strategy::Random:
            order = random_order(pool.ids.size(), Rng::derive(seed, kSaltRandomOrder));
            break;
        case Strategy::Margin:
        case Strategy::Entropy: {
            if (source_model == nullptr)
                throw Error(ErrorCode::InvalidConfig,
                            "probability-based strategy needs a trained classifier");
            std::vector<double> probs(pool.ids.size());
            for (std::size_t i = 0; i < pool.rows.size(); ++i)
                probs[i] = source_model->predict_proba(data.features.row(pool.rows[i]));
            order = strategy == Strategy::Entropy ? entropy_order(probs)
                                                  : margin_order(probs);
            break;
        }
        case Strategy::FarthestFirst: {
            std::vector<std::uint32_t> source_rows;
            for (const Sample& s : data.manifest.samples)
                if (s.domain == data.source_domain) source_rows.push_back(s.feature_row);
            order = farthest_first_order(data.features, pool.rows, source_rows);
            break;
        }
        case Strategy::DualScore:
            throw Error(ErrorCode::InvalidConfig,
                        "dual_score runs through dual_score_order, not baseline_select");
    }

    std::vector<std::string> ids;
    ids.reserve(budget);
    for (std::size_t i = 0; i < budget; ++i) ids.push_back(pool.ids[order[i]]);
    return ids;
}

std::vector<std::string> dual_score_order(const SyntheticData& data,
                                          const BenchConfig& cfg, std::uint64_t seed) {
    FeatureMatrix features = data.features;
    SampleManifest manifest = data.manifest;

    const ProxyConfig proxy = fit_mean_match_maps(features, manifest,
                                                  data.source_domain, cfg.proxy_lambda);
    materialize_recon_rows(features, manifest, ProxyProvider(proxy));

    TrainerConfig head_cfg = cfg.head;
    head_cfg.seed = Rng::derive(seed, kSaltHead);
    const TrainedHead head = train_heads(manifest, features, head_cfg);

    const PoolView pool = pool_view(data);
    std::vector<std::uint32_t> recon_rows;
    for (const std::size_t i : manifest.pool_indices())
        recon_rows.push_back(*manifest.samples[i].recon_row);

    SelectionInputs inputs;
    inputs.ids = pool.ids;
    inputs.domains = pool.domains;
    inputs.pool = embed_rows(head, features, pool.rows);
    inputs.recon = embed_rows(head, features, recon_rows);

    const ClusterModel clusters =
        fit(inputs.pool, cfg.cluster_k, Rng::derive(seed, kSaltCluster));

    ScoringConfig scoring = cfg.scoring;
    scoring.alpha_percent = 50.0;  // only the order matters here
    const SelectionReport report = select(inputs, clusters, scoring);

    std::vector<std::string> order;
    order.reserve(report.rows.size());
    for (const SelectionRow& row : report.rows) order.push_back(row.id);
    return order;
}

double evaluate(const SyntheticData& data, const LogisticModel& pretrained,
                const std::vector<std::string>& selected_ids,
                const ClassifierConfig& cfg) {
    if (selected_ids.empty())
        throw Error(ErrorCode::BudgetExceedsPool, "no samples selected for annotation");

    std::unordered_map<std::string, std::uint32_t> pool_rows;
    for (const std::size_t i : data.manifest.pool_indices()) {
        const Sample& s = data.manifest.samples[i];
        pool_rows.emplace(s.id, s.feature_row);
    }

    // Sorted ids make the fine-tuning pass independent of selection order.
    std::vector<std::string> ids = selected_ids;
    std::sort(ids.begin(), ids.end());
    std::vector<std::uint32_t> rows;
    std::vector<int> targets;
    for (const std::string& id : ids) {
        const auto row_it = pool_rows.find(id);
        const auto label_it = data.pool_labels.find(id);
        if (row_it == pool_rows.end() || label_it == data.pool_labels.end())
            throw Error(ErrorCode::UnknownId, "'" + id + "' is not an unlabeled pool sample");
        rows.push_back(row_it->second);
        targets.push_back(label_it->second == Label::Malignant ? 1 : 0);
    }

    const LogisticModel tuned = train_logistic(data.features, rows, targets,
                                               cfg.finetune_iters, cfg.finetune_lr,
                                               pretrained);

    std::size_t correct = 0, total = 0;
    for (const Sample& s : data.manifest.samples) {
        if (s.domain == data.source_domain || !s.label) continue;
        const bool malignant = tuned.predict_proba(data.features.row(s.feature_row)) >= 0.5;
        const bool truth = *s.label == Label::Malignant;
        correct += malignant == truth ? 1 : 0;
        ++total;
    }
    if (total == 0) throw Error(ErrorCode::EmptySet, "no target test samples");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double evaluate(const SyntheticData& data, const std::vector<std::string>& selected_ids,
                const ClassifierConfig& cfg) {
    return evaluate(data, pretrain_on_source(data, cfg), selected_ids, cfg);
}

std::vector<BenchAggregate> BenchResult::aggregates() const {
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const BenchCell& cell : cells)
        groups[{cell.strategy, cell.alpha}].push_back(cell.accuracy);
    std::vector<BenchAggregate> out;
    for (const auto& [key, values] : groups) {
        BenchAggregate agg;
        agg.strategy = key.first;
        agg.alpha = key.second;
        agg.count = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        agg.mean = sum / static_cast<double>(values.size());
        double sq = 0.0;
        for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
        agg.stddev = std::sqrt(sq / static_cast<double>(values.size()));
        out.push_back(std::move(agg));
    }
    return out;
}

BenchResult run_bench(const BenchConfig& cfg) {
    BenchResult result;
    for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
        const std::uint64_t cell_seed = cfg.spec.seed + s;
        SyntheticSpec spec = cfg.spec;
        spec.seed = cell_seed;
        const SyntheticData data = generate(spec);
        const LogisticModel pretrained = pretrain_on_source(data, cfg.classifier);
        const PoolView pool = pool_view(data);

        for (const Strategy strategy : cfg.strategies) {
            // One full preference order per (strategy, seed); budgets nest.
            std::vector<std::string> order;
            if (strategy == Strategy::DualScore) {
                order = dual_score_order(data, cfg, cell_seed);
            } else {
                order = baseline_select(strategy, data, &pretrained, 100.0, cell_seed);
            }

            std::vector<double> alphas = cfg.alphas;
            if (cfg.include_full) alphas.push_back(100.0);
            for (const double alpha : alphas) {
                const std::size_t budget = budget_for(alpha, pool.ids.size());
                const std::vector<std::string> ids(order.begin(),
                                                   order.begin() +
                                                       static_cast<std::ptrdiff_t>(budget));
                BenchCell cell;
                cell.strategy = strategy_name(strategy);
                cell.alpha = alpha;
                cell.seed = cell_seed;
                cell.accuracy = evaluate(data, pretrained, ids, cfg.classifier);
                result.cells.push_back(std::move(cell));
            }
        }
    }
    return result;
}

void write_bench_csv(const BenchResult& result, std::ostream& out) {
    out << "strategy,alpha,seed,accuracy\n";
    for (const BenchCell& cell : result.cells)
        out << cell.strategy << ',' << format_real(cell.alpha) << ',' << cell.seed
            << ',' << format_real(cell.accuracy) << '\n';
}

void write_bench_summary_csv(const BenchResult& result, std::ostream& out) {
    out << "strategy,alpha,mean,std\n";
    for (const BenchAggregate& agg : result.aggregates())
        out << agg.strategy << ',' << format_real(agg.alpha) << ','
            << format_real(agg.mean) << ',' << format_real(agg.stddev) << '\n';
}

std::vector<std::string> monotonicity_flags(const BenchResult& result) {
    std::map<std::string, std::vector<BenchAggregate>> by_strategy;
    for (const BenchAggregate& agg : result.aggregates())
        by_strategy[agg.strategy].push_back(agg);
    std::vector<std::string> flags;
    for (auto& [strategy, aggs] : by_strategy) {
        std::sort(aggs.begin(), aggs.end(),
                  [](const BenchAggregate& a, const BenchAggregate& b) {
                      return a.alpha < b.alpha;
                  });
        for (std::size_t i = 1; i < aggs.size(); ++i) {
            const BenchAggregate& lo = aggs[i - 1];
            const BenchAggregate& hi = aggs[i];
            const double stderr_combined =
                std::sqrt(lo.stddev * lo.stddev / static_cast<double>(lo.count) +
                          hi.stddev * hi.stddev / static_cast<double>(hi.count));
            if (hi.mean < lo.mean - 2.0 * stderr_combined)
                flags.push_back(strategy + ": mean accuracy drops from " +
                                format_real(lo.mean) + " at alpha=" + format_real(lo.alpha) +
                                " to " + format_real(hi.mean) + " at alpha=" +
                                format_real(hi.alpha) + " (> 2 standard errors)");
        }
    }
    return flags;
}

double paired_sign_test_p(std::size_t wins, std::size_t losses) {
    const std::size_t n = wins + losses;
    if (n == 0) return 1.0;
    // P(X >= wins), X ~ Binomial(n, 1/2), exact summation.
    double p = 0.0;
    double coeff = 1.0;  // C(n, 0)
    for (std::size_t i = 0; i <= n; ++i) {
        if (i >= wins) p += coeff;
        coeff = coeff * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    return p * std::pow(0.5, static_cast<double>(n));
}

}  // namespace spheresel
