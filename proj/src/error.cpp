#include "merodyn/error.hpp"

namespace merodyn {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::TranscendentalAtInfinity: return "TranscendentalAtInfinity";
        case ErrorCode::PoleAt: return "PoleAt";
        case ErrorCode::TailTooLarge: return "TailTooLarge";
        case ErrorCode::RootSearchFailed: return "RootSearchFailed";
        case ErrorCode::NoRepellingSeed: return "NoRepellingSeed";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::OmittedValue: return "OmittedValue";
        case ErrorCode::RootPolishFailed: return "RootPolishFailed";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::BadBracket: return "BadBracket";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::TooFewBranches: return "TooFewBranches";
        case ErrorCode::DegenerateRaster: return "DegenerateRaster";
        case ErrorCode::HypothesisUnverified: return "HypothesisUnverified";
        case ErrorCode::StripAmbiguous: return "StripAmbiguous";
        case ErrorCode::EmptySequence: return "EmptySequence";
        case ErrorCode::Undecidable: return "Undecidable";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

void rethrow_with_context(const Error& e, std::string_view context) {
    std::string msg = e.what();
    // strip the "Code: " prefix the constructor adds, it is re-added below
    const auto prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    throw Error(e.code(), std::string(context) + ": " + msg);
}

}  // namespace merodyn
