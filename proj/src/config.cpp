#include "spheresel/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace spheresel {

namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("config field '") + key + "': " + e.what());
    }
}

void read_trainer(const json& obj, TrainerConfig& cfg) {
    read_field(obj, "epochs", cfg.epochs);
    read_field(obj, "learning_rate", cfg.learning_rate);
    read_field(obj, "lr_floor", cfg.lr_floor);
    read_field(obj, "batch_size", cfg.batch_size);
    read_field(obj, "ema_momentum", cfg.ema_momentum);
    read_field(obj, "hidden_dim", cfg.hidden_dim);
    read_field(obj, "d_embed", cfg.embed_dim);
}

json trainer_json(const TrainerConfig& cfg) {
    return json{{"epochs", cfg.epochs},
                {"learning_rate", cfg.learning_rate},
                {"lr_floor", cfg.lr_floor},
                {"batch_size", cfg.batch_size},
                {"ema_momentum", cfg.ema_momentum},
                {"hidden_dim", cfg.hidden_dim},
                {"d_embed", cfg.embed_dim}};
}

void read_scoring(const json& obj, ScoringConfig& cfg) {
    read_field(obj, "omega", cfg.omega);
    read_field(obj, "alpha_percent", cfg.alpha_percent);
    if (obj.contains("uncertainty_mode"))
        cfg.uncertainty_mode =
            parse_uncertainty_mode(obj.at("uncertainty_mode").get<std::string>());
    if (obj.contains("combine_mode"))
        cfg.combine_mode = parse_combine_mode(obj.at("combine_mode").get<std::string>());
}

json scoring_json(const ScoringConfig& cfg) {
    return json{{"omega", cfg.omega},
                {"uncertainty_mode", uncertainty_mode_name(cfg.uncertainty_mode)},
                {"combine_mode", combine_mode_name(cfg.combine_mode)},
                {"alpha_percent", cfg.alpha_percent}};
}

}  // namespace

const char* provider_name(ProviderKind kind) {
    return kind == ProviderKind::Proxy ? "proxy" : "external";
}

ProviderKind parse_provider(const std::string& text) {
    if (text == "proxy") return ProviderKind::Proxy;
    if (text == "external") return ProviderKind::External;
    throw Error(ErrorCode::Parse, "unknown provider '" + text + "'");
}

void RunConfig::validate() const {
    trainer.validate();
    scoring.validate();
    synthetic.validate();
    bench.head.validate();
    bench.scoring.validate();
    if (cluster_k < 1)
        throw Error(ErrorCode::InvalidConfig, "cluster k must be >= 1");
    if (cluster_max_iters < 1)
        throw Error(ErrorCode::InvalidConfig, "cluster max_iters must be >= 1");
    if (!(cluster_tol >= 0.0))
        throw Error(ErrorCode::InvalidConfig, "cluster tol must be >= 0");
    if (!(proxy_lambda >= 0.0 && proxy_lambda <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "proxy lambda must be in [0, 1]");
    if (threads < 1)
        throw Error(ErrorCode::InvalidConfig, "threads must be >= 1");
    if (bench.n_seeds < 1)
        throw Error(ErrorCode::InvalidConfig, "bench n_seeds must be >= 1");
    if (explicit_proxy_maps) proxy_maps.validate();
    for (const double a : bench.alphas)
        if (!(a > 0.0 && a <= 100.0))
            throw Error(ErrorCode::InvalidConfig, "bench alphas must be in (0, 100]");
}

std::filesystem::path RunConfig::checkpoint_file() const {
    if (!checkpoint_path.empty()) return checkpoint_path;
    return std::filesystem::path(out_dir) / "head.ckpt";
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }

    RunConfig cfg;
    if (doc.contains("paths")) {
        const json& paths = doc["paths"];
        read_field(paths, "features", cfg.features_path);
        read_field(paths, "manifest", cfg.manifest_path);
        read_field(paths, "out_dir", cfg.out_dir);
        read_field(paths, "checkpoint", cfg.checkpoint_path);
    }
    read_field(doc, "seed", cfg.seed);
    read_field(doc, "threads", cfg.threads);
    if (doc.contains("loss")) {
        read_field(doc["loss"], "m", cfg.trainer.loss.m);
        read_field(doc["loss"], "eps_clamp", cfg.trainer.loss.eps_clamp);
    }
    if (doc.contains("train")) read_trainer(doc["train"], cfg.trainer);
    if (doc.contains("cluster")) {
        read_field(doc["cluster"], "k", cfg.cluster_k);
        read_field(doc["cluster"], "max_iters", cfg.cluster_max_iters);
        read_field(doc["cluster"], "tol", cfg.cluster_tol);
    }
    if (doc.contains("scoring")) read_scoring(doc["scoring"], cfg.scoring);
    if (doc.contains("provider")) {
        const json& prov = doc["provider"];
        if (prov.contains("kind"))
            cfg.provider = parse_provider(prov.at("kind").get<std::string>());
        read_field(prov, "lambda", cfg.proxy_lambda);
        read_field(prov, "source_domain", cfg.source_domain);
        if (prov.contains("maps") && prov["maps"].is_object()) {
            cfg.explicit_proxy_maps = true;
            cfg.proxy_maps.lambda = cfg.proxy_lambda;
            for (const auto& [domain, entry] : prov["maps"].items()) {
                AffineMap map;
                read_field(entry, "offset", map.offset);
                read_field(entry, "matrix", map.matrix);
                cfg.proxy_maps.maps.emplace(domain, std::move(map));
            }
        }
    }
    if (doc.contains("embed_with")) {
        const auto text = doc.at("embed_with").get<std::string>();
        if (text == "student") cfg.embed_with = HeadSide::Student;
        else if (text == "teacher") cfg.embed_with = HeadSide::Teacher;
        else throw Error(ErrorCode::Parse, "embed_with must be student or teacher");
    }
    if (doc.contains("synthetic")) {
        const json& syn = doc["synthetic"];
        read_field(syn, "n_target_domains", cfg.synthetic.n_target_domains);
        read_field(syn, "samples_per_domain", cfg.synthetic.samples_per_domain);
        read_field(syn, "feature_dim", cfg.synthetic.feature_dim);
        read_field(syn, "shift_magnitude", cfg.synthetic.shift_magnitude);
        read_field(syn, "class_separation", cfg.synthetic.class_separation);
        read_field(syn, "label_noise", cfg.synthetic.label_noise);
    }
    if (doc.contains("bench")) {
        const json& bench = doc["bench"];
        read_field(bench, "n_seeds", cfg.bench.n_seeds);
        read_field(bench, "alphas", cfg.bench.alphas);
        read_field(bench, "include_full", cfg.bench.include_full);
        read_field(bench, "cluster_k", cfg.bench.cluster_k);
        read_field(bench, "proxy_lambda", cfg.bench.proxy_lambda);
        if (bench.contains("strategies")) {
            cfg.bench.strategies.clear();
            for (const auto& name : bench.at("strategies"))
                cfg.bench.strategies.push_back(parse_strategy(name.get<std::string>()));
        }
        if (bench.contains("head")) read_trainer(bench["head"], cfg.bench.head);
        if (bench.contains("scoring")) read_scoring(bench["scoring"], cfg.bench.scoring);
        if (bench.contains("classifier")) {
            const json& cls = bench["classifier"];
            read_field(cls, "pretrain_iters", cfg.bench.classifier.pretrain_iters);
            read_field(cls, "pretrain_lr", cfg.bench.classifier.pretrain_lr);
            read_field(cls, "finetune_iters", cfg.bench.classifier.finetune_iters);
            read_field(cls, "finetune_lr", cfg.bench.classifier.finetune_lr);
        }
    }
    cfg.bench.spec = cfg.synthetic;
    cfg.bench.head.loss = cfg.trainer.loss;  // one loss config per run
    cfg.validate();
    return cfg;
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    json doc;
    doc["paths"] = {{"features", cfg.features_path},
                    {"manifest", cfg.manifest_path},
                    {"out_dir", cfg.out_dir}};
    if (!cfg.checkpoint_path.empty()) doc["paths"]["checkpoint"] = cfg.checkpoint_path;
    doc["seed"] = cfg.seed;
    doc["threads"] = cfg.threads;
    doc["loss"] = {{"m", cfg.trainer.loss.m}, {"eps_clamp", cfg.trainer.loss.eps_clamp}};
    doc["train"] = trainer_json(cfg.trainer);
    doc["cluster"] = {{"k", cfg.cluster_k},
                      {"max_iters", cfg.cluster_max_iters},
                      {"tol", cfg.cluster_tol}};
    doc["scoring"] = scoring_json(cfg.scoring);
    doc["provider"] = {{"kind", provider_name(cfg.provider)},
                       {"lambda", cfg.proxy_lambda},
                       {"source_domain", cfg.source_domain},
                       {"maps", "mean_match"}};
    doc["embed_with"] = cfg.embed_with == HeadSide::Student ? "student" : "teacher";
    doc["synthetic"] = {{"n_target_domains", cfg.synthetic.n_target_domains},
                        {"samples_per_domain", cfg.synthetic.samples_per_domain},
                        {"feature_dim", cfg.synthetic.feature_dim},
                        {"shift_magnitude", cfg.synthetic.shift_magnitude},
                        {"class_separation", cfg.synthetic.class_separation},
                        {"label_noise", cfg.synthetic.label_noise}};
    json strategies = json::array();
    for (const Strategy s : cfg.bench.strategies) strategies.push_back(strategy_name(s));
    doc["bench"] = {{"n_seeds", cfg.bench.n_seeds},
                    {"alphas", cfg.bench.alphas},
                    {"include_full", cfg.bench.include_full},
                    {"cluster_k", cfg.bench.cluster_k},
                    {"proxy_lambda", cfg.bench.proxy_lambda},
                    {"strategies", std::move(strategies)},
                    {"head", trainer_json(cfg.bench.head)},
                    {"scoring", scoring_json(cfg.bench.scoring)},
                    {"classifier",
                     {{"pretrain_iters", cfg.bench.classifier.pretrain_iters},
                      {"pretrain_lr", cfg.bench.classifier.pretrain_lr},
                      {"finetune_iters", cfg.bench.classifier.finetune_iters},
                      {"finetune_lr", cfg.bench.classifier.finetune_lr}}}};

    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "' for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::Io, "write failure on '" + path.string() + "'");
}

}  // namespace spheresel
