#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spheresel/errors.hpp"

namespace spheresel {

// Dense row-major matrix of raw backbone features. Storage is float32 to
// mirror the on-disk format bit for bit; all arithmetic on top of it is
// done in double.
struct FeatureMatrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<float> data;  // rows * cols, row-major

    FeatureMatrix() = default;
    FeatureMatrix(std::uint32_t n, std::uint32_t d)
        : rows(n), cols(d), data(static_cast<std::size_t>(n) * d, 0.0f) {}

    std::span<const float> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
    std::span<float> row(std::size_t i) {
        return {data.data() + i * cols, cols};
    }

    std::vector<double> row_as_double(std::size_t i) const {
        auto r = row(i);
        return std::vector<double>(r.begin(), r.end());
    }

    void append_row(std::span<const float> values) {
        if (values.size() != cols)
            throw Error(ErrorCode::DimensionMismatch,
                        "appended row has dimension " + std::to_string(values.size()) +
                            ", matrix has " + std::to_string(cols));
        data.insert(data.end(), values.begin(), values.end());
        ++rows;
    }
};

// L2-normalized vectors produced by a projection head, one row per sample.
struct EmbeddingSet {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> data;  // count * dim, row-major

    EmbeddingSet() = default;
    EmbeddingSet(std::size_t n, std::size_t d)
        : count(n), dim(d), data(n * d, 0.0) {}

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * dim, dim};
    }
};

enum class Label { Benign, Malignant };

struct Sample {
    std::string id;
    std::string domain;
    std::uint32_t feature_row = 0;
    std::optional<std::uint32_t> recon_row;
    std::optional<Label> label;

    bool labeled() const { return label.has_value(); }
};

// Per-sample identity, domain tag, optional label, and the pairing of
// original and reconstruction feature rows. The pairing is the main
// data-integrity surface of the pipeline, hence the strict validation.
struct SampleManifest {
    std::vector<Sample> samples;

    // Invariant checks that need to know the feature file size.
    void validate(std::uint32_t feature_rows) const;

    // Indices of unlabeled samples: the selection pool D_U.
    std::vector<std::size_t> pool_indices() const;
};

const char* label_name(Label label);
Label parse_label(const std::string& text);

}  // namespace spheresel
