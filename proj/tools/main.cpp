// spheresel command-line tool: synthetic data generation, projection-head
// training, dual-score sample selection, benchmarking, and domain-bias
// analytics, driven by one JSON config with flag overrides.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "spheresel/bench.hpp"
#include "spheresel/config.hpp"
#include "spheresel/dataio.hpp"
#include "spheresel/reconproxy.hpp"
#include "spheresel/rng.hpp"

namespace fs = std::filesystem;
using namespace spheresel;

namespace {

constexpr std::uint64_t kSaltTrain = 101;
constexpr std::uint64_t kSaltCluster = 102;
constexpr std::uint64_t kSaltGen = 103;

const char* kConfigHelp = R"(Config file fields (JSON) and defaults:
  paths.features / paths.manifest / paths.out_dir ("out") / paths.checkpoint
  seed (42)                 master seed; all randomness derives from it
  threads (1)               worker cap for embedding/scoring; results identical at any cap
  loss.m (4)                angular scaling factor of the contrastive loss
  loss.eps_clamp (1e-7)     cosine clamp keeping arccos derivatives finite
  train.epochs (200)        projection-head training epochs
  train.learning_rate (1e-4), train.lr_floor (0), cosine-annealed per epoch
  train.batch_size (32), train.ema_momentum (0.99), train.hidden_dim (512)
  train.d_embed (256)       hypersphere ambient dimension
  cluster.k (4)             spherical k-means centroid count
  cluster.max_iters (100), cluster.tol (1e-6)
  scoring.omega (1.0)       weight of the representativeness term
  scoring.uncertainty_mode (pairwise_min | range)
  scoring.combine_mode (raw | rank)
  scoring.alpha_percent (20)  annotation budget; typical sweep 20/30/50/80
  provider.kind (proxy | external), provider.lambda (1.0),
  provider.source_domain ("source"), provider.maps ("mean_match" or explicit)
  embed_with (student)      which frozen head embeds at scoring time
  synthetic.*               generator: n_target_domains (2), samples_per_domain (200),
                            feature_dim (16), shift_magnitude (2.5),
                            class_separation (4.0), label_noise (0)
  bench.*                   harness: n_seeds (20), alphas, strategies, include_full,
                            cluster_k, proxy_lambda, head.*, scoring.*, classifier.*

Environment: SPHERESEL_OUT overrides paths.out_dir.
Exit codes: 0 on success; library error classes map to distinct codes 10-32
(see README).)";

struct CliOverrides {
    std::string config_path;
    std::string features, manifest, out_dir, checkpoint;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    double alpha = 0.0;
    bool alpha_set = false;
    std::size_t epochs = 0;
    double lr = 0.0;
    std::size_t k = 0;
    double omega = 0.0;
    bool omega_set = false;
    double lambda = -1.0;
    std::string provider, uncertainty_mode, combine_mode;

    // gen-only
    std::size_t gen_samples = 0, gen_targets = 0, gen_dim = 0;
    double gen_shift = -1.0, gen_sep = -1.0, gen_noise = -1.0;
    bool reveal = false;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON config file");
    cmd->add_option("--features", o.features, "feature file path override");
    cmd->add_option("--manifest", o.manifest, "manifest path override");
    cmd->add_option("--out", o.out_dir, "output directory override");
    cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path override");
    cmd->add_option("--seed", o.seed, "master seed override")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--threads", o.threads, "worker thread cap");
}

RunConfig make_config(const CliOverrides& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) cfg = load_config(o.config_path);
    if (!o.features.empty()) cfg.features_path = o.features;
    if (!o.manifest.empty()) cfg.manifest_path = o.manifest;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (!o.checkpoint.empty()) cfg.checkpoint_path = o.checkpoint;
    if (o.seed_set) cfg.seed = o.seed;
    if (o.threads > 0) cfg.threads = o.threads;
    if (o.alpha_set) {
        cfg.scoring.alpha_percent = o.alpha;
        cfg.bench.scoring.alpha_percent = o.alpha;
    }
    if (o.epochs > 0) cfg.trainer.epochs = o.epochs;
    if (o.lr > 0.0) cfg.trainer.learning_rate = o.lr;
    if (o.k > 0) cfg.cluster_k = o.k;
    if (o.omega_set) cfg.scoring.omega = o.omega;
    if (o.lambda >= 0.0) cfg.proxy_lambda = o.lambda;
    if (!o.provider.empty()) cfg.provider = parse_provider(o.provider);
    if (!o.uncertainty_mode.empty())
        cfg.scoring.uncertainty_mode = parse_uncertainty_mode(o.uncertainty_mode);
    if (!o.combine_mode.empty())
        cfg.scoring.combine_mode = parse_combine_mode(o.combine_mode);
    if (o.gen_samples > 0) cfg.synthetic.samples_per_domain = o.gen_samples;
    if (o.gen_targets > 0) cfg.synthetic.n_target_domains = o.gen_targets;
    if (o.gen_dim > 0) cfg.synthetic.feature_dim = o.gen_dim;
    if (o.gen_shift >= 0.0) cfg.synthetic.shift_magnitude = o.gen_shift;
    if (o.gen_sep >= 0.0) cfg.synthetic.class_separation = o.gen_sep;
    if (o.gen_noise >= 0.0) cfg.synthetic.label_noise = o.gen_noise;
    cfg.bench.spec = cfg.synthetic;
    if (const char* env_out = std::getenv("SPHERESEL_OUT")) cfg.out_dir = env_out;
    cfg.validate();
    return cfg;
}

struct LoadedData {
    FeatureMatrix features;
    SampleManifest manifest;
};

LoadedData load_inputs(const RunConfig& cfg) {
    if (cfg.features_path.empty() || cfg.manifest_path.empty())
        throw Error(ErrorCode::InvalidConfig,
                    "features and manifest paths are required (set via config or flags)");
    LoadedData d;
    d.features = read_features(cfg.features_path);
    d.manifest = load_manifest(cfg.manifest_path, d.features.rows);
    return d;
}

// Fills in reconstruction rows per the configured provider. For the proxy
// provider the maps come from the config or are fitted to match each
// domain's mean onto the source mean. External mode requires the manifest
// to already pair every pool sample.
void prepare_recon(LoadedData& d, const RunConfig& cfg) {
    if (cfg.provider == ProviderKind::External) {
        for (const Sample& s : d.manifest.samples)
            if (!s.labeled() && !s.recon_row)
                throw Error(ErrorCode::MissingReconPair,
                            "sample '" + s.id +
                                "' lacks a reconstruction row and provider is external");
        return;
    }
    ProxyConfig proxy = cfg.explicit_proxy_maps
                            ? cfg.proxy_maps
                            : fit_mean_match_maps(d.features, d.manifest,
                                                  cfg.source_domain, cfg.proxy_lambda);
    proxy.lambda = cfg.proxy_lambda;
    materialize_recon_rows(d.features, d.manifest, ProxyProvider(proxy));
}

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
        throw Error(ErrorCode::Io, "cannot create output dir '" + cfg.out_dir + "'");
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF line endings everywhere
    if (!out)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    return out;
}

int cmd_gen(const CliOverrides& o) {
    RunConfig cfg = make_config(o);
    SyntheticSpec spec = cfg.synthetic;
    spec.seed = Rng::derive(cfg.seed, kSaltGen);
    const SyntheticData data = generate(spec);

    ensure_out_dir(cfg);
    const fs::path features_path = fs::path(cfg.out_dir) / "features.bin";
    const fs::path manifest_path = fs::path(cfg.out_dir) / "manifest.json";
    write_features(data.features, features_path);
    save_manifest(data.manifest, manifest_path);
    if (o.reveal) {
        auto out = open_out(fs::path(cfg.out_dir) / "pool_labels.csv");
        out << "id,label\n";
        for (const auto& [id, label] : data.pool_labels)
            out << id << ',' << label_name(label) << '\n';
    }
    std::cout << "wrote " << features_path.string() << " (" << data.features.rows << "x"
              << data.features.cols << ") and " << manifest_path.string() << " ("
              << data.manifest.samples.size() << " samples, "
              << data.manifest.pool_indices().size() << " pool)\n";
    return 0;
}

int cmd_train(const CliOverrides& o) {
    RunConfig cfg = make_config(o);
    LoadedData d = load_inputs(cfg);
    prepare_recon(d, cfg);

    TrainerConfig trainer = cfg.trainer;
    trainer.seed = Rng::derive(cfg.seed, kSaltTrain);
    const TrainedHead head = train_heads(
        d.manifest, d.features, trainer, [](std::size_t epoch, double loss) {
            std::cout << epoch << ',' << format_real(loss) << '\n';
        });

    ensure_out_dir(cfg);
    save_head_checkpoint(head, cfg.checkpoint_file());
    std::cout << "checkpoint: " << cfg.checkpoint_file().string() << '\n';
    return 0;
}

int cmd_select(const CliOverrides& o) {
    RunConfig cfg = make_config(o);
    LoadedData d = load_inputs(cfg);
    prepare_recon(d, cfg);

    const TrainedHead head =
        load_head_checkpoint(cfg.checkpoint_file(), cfg.trainer.embed_dim);

    std::vector<std::uint32_t> pool_rows, recon_rows;
    SelectionInputs inputs;
    for (const std::size_t i : d.manifest.pool_indices()) {
        const Sample& s = d.manifest.samples[i];
        if (!s.recon_row)
            throw Error(ErrorCode::MissingReconPair,
                        "sample '" + s.id + "' lacks a reconstruction row");
        inputs.ids.push_back(s.id);
        inputs.domains.push_back(s.domain);
        pool_rows.push_back(s.feature_row);
        recon_rows.push_back(*s.recon_row);
    }
    inputs.pool = embed_rows(head, d.features, pool_rows, cfg.embed_with, cfg.threads);
    inputs.recon = embed_rows(head, d.features, recon_rows, cfg.embed_with, cfg.threads);

    const ClusterModel clusters =
        fit(inputs.pool, cfg.cluster_k, Rng::derive(cfg.seed, kSaltCluster),
            cfg.cluster_max_iters, cfg.cluster_tol);
    const SelectionReport report = select(inputs, clusters, cfg.scoring, cfg.threads);

    ensure_out_dir(cfg);
    {
        auto out = open_out(fs::path(cfg.out_dir) / "selection.csv");
        write_selection_csv(report, out);
    }
    {
        // Raw coordinates for external visualization of the clustered sphere.
        auto out = open_out(fs::path(cfg.out_dir) / "embeddings.csv");
        out << "id,domain,cluster";
        for (std::size_t c = 0; c < inputs.pool.dim; ++c) out << ",z" << c;
        out << '\n';
        for (std::size_t i = 0; i < inputs.pool.count; ++i) {
            out << inputs.ids[i] << ',' << inputs.domains[i] << ','
                << clusters.assignments[i];
            for (const double v : inputs.pool.row(i)) out << ',' << format_real(v);
            out << '\n';
        }
    }
    save_cluster_checkpoint(clusters, fs::path(cfg.out_dir) / "clusters.ckpt");

    std::size_t selected = 0;
    for (const SelectionRow& row : report.rows) selected += row.selected ? 1 : 0;
    std::cout << "pool " << report.pool_size << ", selected " << selected << " (alpha "
              << format_real(cfg.scoring.alpha_percent) << "%), reports in "
              << cfg.out_dir << '\n';
    return 0;
}

int cmd_bench(const CliOverrides& o) {
    RunConfig cfg = make_config(o);
    BenchConfig bench = cfg.bench;
    bench.spec.seed = cfg.seed;
    const BenchResult result = run_bench(bench);

    ensure_out_dir(cfg);
    {
        auto out = open_out(fs::path(cfg.out_dir) / "bench.csv");
        write_bench_csv(result, out);
    }
    {
        auto out = open_out(fs::path(cfg.out_dir) / "bench_summary.csv");
        write_bench_summary_csv(result, out);
    }
    write_bench_summary_csv(result, std::cout);
    for (const std::string& flag : monotonicity_flags(result))
        std::cerr << "warning: " << flag << '\n';
    return 0;
}

int cmd_analyze(const CliOverrides& o) {
    RunConfig cfg = make_config(o);
    LoadedData d = load_inputs(cfg);

    // Per-domain matrices of original rows, source plus targets by name.
    std::map<std::string, std::vector<std::uint32_t>> domain_rows;
    for (const Sample& s : d.manifest.samples)
        domain_rows[s.domain].push_back(s.feature_row);
    if (!domain_rows.count(cfg.source_domain))
        throw Error(ErrorCode::UnknownDomain,
                    "source domain '" + cfg.source_domain + "' not in manifest");

    auto submatrix = [&](const std::vector<std::uint32_t>& rows) {
        FeatureMatrix m(0, d.features.cols);
        for (const std::uint32_t r : rows) m.append_row(d.features.row(r));
        return m;
    };

    const FeatureMatrix source = submatrix(domain_rows.at(cfg.source_domain));
    std::vector<std::pair<std::string, FeatureMatrix>> originals;
    for (const auto& [domain, rows] : domain_rows) {
        if (domain == cfg.source_domain) continue;
        originals.emplace_back(domain, submatrix(rows));
    }

    ProxyConfig proxy = cfg.explicit_proxy_maps
                            ? cfg.proxy_maps
                            : fit_mean_match_maps(d.features, d.manifest,
                                                  cfg.source_domain, cfg.proxy_lambda);
    proxy.lambda = cfg.proxy_lambda;
    std::vector<std::pair<std::string, FeatureMatrix>> homogenized;
    for (const auto& [domain, matrix] : originals) {
        FeatureMatrix mapped(0, matrix.cols);
        for (std::size_t i = 0; i < matrix.rows; ++i)
            mapped.append_row(proxy_reconstruct(matrix.row(i), domain, proxy));
        homogenized.emplace_back(domain, std::move(mapped));
    }

    const DomainBiasReport before = domain_bias(source, originals, cfg.source_domain);
    const DomainBiasReport after = domain_bias(source, homogenized, cfg.source_domain);

    ensure_out_dir(cfg);
    {
        auto out = open_out(fs::path(cfg.out_dir) / "bias_report.csv");
        out << "phase,domain,count,mean,std,bias\n";
        auto emit = [&](const char* phase, const DomainStats& s) {
            out << phase << ',' << s.domain << ',' << s.count << ','
                << format_real(s.mean) << ',' << format_real(s.stddev) << ','
                << format_real(s.bias) << '\n';
        };
        emit("original", before.source);
        for (const DomainStats& s : before.targets) emit("original", s);
        for (const DomainStats& s : after.targets) emit("homogenized", s);
    }
    auto write_kde = [&](const fs::path& path, const DomainBiasReport& report) {
        auto out = open_out(path);
        out << "domain,similarity\n";
        auto emit = [&](const DomainStats& s) {
            for (const double v : s.similarities)
                out << s.domain << ',' << format_real(v) << '\n';
        };
        emit(report.source);
        for (const DomainStats& s : report.targets) emit(s);
    };
    write_kde(fs::path(cfg.out_dir) / "kde_original.csv", before);
    write_kde(fs::path(cfg.out_dir) / "kde_homogenized.csv", after);

    std::cout << "domain,bias_original,bias_homogenized\n";
    for (std::size_t i = 0; i < before.targets.size(); ++i)
        std::cout << before.targets[i].domain << ','
                  << format_real(before.targets[i].bias) << ','
                  << format_real(after.targets[i].bias) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spheresel: hypersphere-embedding active-learning sample selection"};
    app.require_subcommand(1);
    app.footer(kConfigHelp);

    CliOverrides o;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic multi-domain dataset");
    add_common_flags(gen, o);
    gen->add_option("--samples", o.gen_samples, "samples per domain");
    gen->add_option("--targets", o.gen_targets, "number of target domains");
    gen->add_option("--dim", o.gen_dim, "feature dimension");
    gen->add_option("--shift", o.gen_shift, "domain mean shift magnitude");
    gen->add_option("--class-sep", o.gen_sep, "class separation");
    gen->add_option("--noise", o.gen_noise, "label noise rate");
    gen->add_flag("--reveal", o.reveal, "also write the pool answer key CSV");

    CLI::App* train =
        app.add_subcommand("train", "train the teacher-student projection head");
    add_common_flags(train, o);
    train->add_option("--epochs", o.epochs, "training epochs");
    train->add_option("--lr", o.lr, "initial learning rate");
    train->add_option("--lambda", o.lambda, "proxy blend factor in [0,1]");
    train->add_option("--provider", o.provider, "proxy | external");

    CLI::App* sel =
        app.add_subcommand("select", "rank the pool and select the top-alpha%");
    add_common_flags(sel, o);
    sel->add_option("--alpha", o.alpha, "annotation budget percent in (0,100)")
        ->each([&o](const std::string&) { o.alpha_set = true; });
    sel->add_option("-k,--clusters", o.k, "spherical k-means centroid count");
    sel->add_option("--omega", o.omega, "representativeness weight")
        ->each([&o](const std::string&) { o.omega_set = true; });
    sel->add_option("--uncertainty-mode", o.uncertainty_mode, "pairwise_min | range");
    sel->add_option("--combine-mode", o.combine_mode, "raw | rank");
    sel->add_option("--lambda", o.lambda, "proxy blend factor in [0,1]");
    sel->add_option("--provider", o.provider, "proxy | external");

    CLI::App* bench = app.add_subcommand("bench", "accuracy-vs-budget benchmark harness");
    add_common_flags(bench, o);

    CLI::App* analyze =
        app.add_subcommand("analyze", "cross-domain similarity and bias report");
    add_common_flags(analyze, o);
    analyze->add_option("--lambda", o.lambda, "proxy blend factor in [0,1]");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(o);
        if (train->parsed()) return cmd_train(o);
        if (sel->parsed()) return cmd_select(o);
        if (bench->parsed()) return cmd_bench(o);
        if (analyze->parsed()) return cmd_analyze(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
