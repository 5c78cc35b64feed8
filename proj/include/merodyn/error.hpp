#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace merodyn {

enum class ErrorCode {
    InvalidArgument,
    TranscendentalAtInfinity,
    PoleAt,
    TailTooLarge,
    RootSearchFailed,
    NoRepellingSeed,
    DegenerateFit,
    OmittedValue,
    RootPolishFailed,
    Diverged,
    BadBracket,
    NotConverged,
    TooFewBranches,
    DegenerateRaster,
    HypothesisUnverified,
    StripAmbiguous,
    EmptySequence,
    Undecidable,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // Soft failures: the numeric probe could not decide. The CLI maps these to exit 2.
    bool is_inconclusive() const noexcept {
        return code_ == ErrorCode::HypothesisUnverified || code_ == ErrorCode::Undecidable ||
               code_ == ErrorCode::StripAmbiguous;
    }

private:
    ErrorCode code_;
};

// Re-throws with a stage label prefixed, keeping the code.
[[noreturn]] void rethrow_with_context(const Error& e, std::string_view context);

}  // namespace merodyn
