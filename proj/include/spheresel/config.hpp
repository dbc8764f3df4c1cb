#pragma once

#include <filesystem>
#include <string>

#include "spheresel/bench.hpp"
#include "spheresel/reconproxy.hpp"
#include "spheresel/selection.hpp"
#include "spheresel/tinynet.hpp"

namespace spheresel {

enum class ProviderKind { Proxy, External };

const char* provider_name(ProviderKind kind);
ProviderKind parse_provider(const std::string& text);

// Single source of truth for a run: every tunable in the pipeline lives
// here, flags only override individual fields. All randomness flows from
// `seed`; there is no wall-clock entropy anywhere.
struct RunConfig {
    std::string features_path;
    std::string manifest_path;
    std::string out_dir = "out";
    std::string checkpoint_path;  // defaults to <out_dir>/head.ckpt

    std::uint64_t seed = 42;
    int threads = 1;

    TrainerConfig trainer;  // epochs=200, lr=1e-4, hidden=512, d_embed=256

    std::size_t cluster_k = 4;
    std::size_t cluster_max_iters = 100;
    double cluster_tol = 1e-6;

    ScoringConfig scoring;  // omega=1, pairwise_min, raw, alpha=20

    ProviderKind provider = ProviderKind::Proxy;
    double proxy_lambda = 1.0;
    std::string source_domain = "source";
    bool explicit_proxy_maps = false;  // true when maps came from the config file
    ProxyConfig proxy_maps;            // used only when explicit_proxy_maps

    HeadSide embed_with = HeadSide::Student;

    SyntheticSpec synthetic;
    BenchConfig bench;

    void validate() const;
    std::filesystem::path checkpoint_file() const;
};

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace spheresel
