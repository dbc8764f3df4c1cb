#include "spheresel/errors.hpp"

namespace spheresel {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::UnpairedSample: return "UnpairedSample";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::DegenerateMean: return "DegenerateMean";
        case ErrorCode::TooFewCentroids: return "TooFewCentroids";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::UnknownDomain: return "UnknownDomain";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::DanglingRowIndex: return "DanglingRowIndex";
        case ErrorCode::MissingReconPair: return "MissingReconPair";
        case ErrorCode::BudgetExceedsPool: return "BudgetExceedsPool";
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::CheckpointMismatch: return "CheckpointMismatch";
    }
    return "Error";
}

}  // namespace spheresel
