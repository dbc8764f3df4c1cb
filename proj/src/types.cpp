#include "spheresel/types.hpp"

#include <unordered_set>

namespace spheresel {

const char* label_name(Label label) {
    return label == Label::Benign ? "benign" : "malignant";
}

Label parse_label(const std::string& text) {
    if (text == "benign") return Label::Benign;
    if (text == "malignant") return Label::Malignant;
    throw Error(ErrorCode::Parse, "unknown label '" + text + "'");
}

void SampleManifest::validate(std::uint32_t feature_rows) const {
    std::unordered_set<std::string> seen;
    seen.reserve(samples.size());
    for (const Sample& s : samples) {
        if (!seen.insert(s.id).second)
            throw Error(ErrorCode::DuplicateId, "sample id '" + s.id + "'");
        if (s.feature_row >= feature_rows)
            throw Error(ErrorCode::DanglingRowIndex,
                        "sample '" + s.id + "' feature_row " +
                            std::to_string(s.feature_row) + " >= " +
                            std::to_string(feature_rows));
        if (s.recon_row && *s.recon_row >= feature_rows)
            throw Error(ErrorCode::DanglingRowIndex,
                        "sample '" + s.id + "' recon_row " +
                            std::to_string(*s.recon_row) + " >= " +
                            std::to_string(feature_rows));
    }
}

std::vector<std::size_t> SampleManifest::pool_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!samples[i].labeled()) out.push_back(i);
    return out;
}

}  // namespace spheresel
