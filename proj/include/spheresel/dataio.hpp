#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "spheresel/clustering.hpp"
#include "spheresel/tinynet.hpp"
#include "spheresel/types.hpp"

namespace spheresel {

// On-disk formats: the dense feature-matrix file, JSON sample manifests,
// and versioned binary checkpoints. All multi-byte values are little-endian
// regardless of host; round-trips are bitwise.

// Feature file layout: magic "ADAPTFV1" (8 bytes), u32 row count, u32
// dimension, then rows*cols float32 values row-major. File length must be
// exactly 16 + 4*rows*cols.
inline constexpr char kFeatureMagic[8] = {'A', 'D', 'A', 'P', 'T', 'F', 'V', '1'};

FeatureMatrix read_features(const std::filesystem::path& path);
void write_features(const FeatureMatrix& matrix, const std::filesystem::path& path);

// Manifest JSON: {"samples": [{"id", "domain", "feature_row", "recon_row"?,
// "label"?}, ...]}. Uniqueness and row bounds are checked against the
// feature file's row count at load time.
SampleManifest load_manifest(const std::filesystem::path& path,
                             std::uint32_t feature_rows);
void save_manifest(const SampleManifest& manifest, const std::filesystem::path& path);

// Checkpoints embed a format version and the config snapshot; loading with a
// mismatched embedding dimension fails loudly.
void save_head_checkpoint(const TrainedHead& head, const std::filesystem::path& path);
TrainedHead load_head_checkpoint(const std::filesystem::path& path,
                                 std::optional<std::size_t> expect_embed_dim = {});

void save_cluster_checkpoint(const ClusterModel& model,
                             const std::filesystem::path& path);
ClusterModel load_cluster_checkpoint(const std::filesystem::path& path,
                                     std::optional<std::size_t> expect_dim = {});

// 9 significant digits, locale-independent; shared by every CSV writer.
std::string format_real(double value);

}  // namespace spheresel
