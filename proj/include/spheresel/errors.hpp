#pragma once

#include <stdexcept>
#include <string>

namespace spheresel {

// Every failure mode the library can signal. The numeric value doubles as
// the CLI process exit code, so codes must stay stable once released.
enum class ErrorCode : int {
    ZeroVector = 10,
    DimensionMismatch = 11,
    EmptyBatch = 12,
    NonFiniteLoss = 13,
    UnpairedSample = 14,
    TooFewSamples = 15,
    DegenerateMean = 16,
    TooFewCentroids = 17,
    EmptyPool = 18,
    UnknownDomain = 19,
    EmptySet = 20,
    BadMagic = 21,
    Truncated = 22,
    NonFinite = 23,
    Io = 24,
    Parse = 25,
    DuplicateId = 26,
    DanglingRowIndex = 27,
    MissingReconPair = 28,
    BudgetExceedsPool = 29,
    UnknownId = 30,
    InvalidConfig = 31,
    CheckpointMismatch = 32,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

}  // namespace spheresel
