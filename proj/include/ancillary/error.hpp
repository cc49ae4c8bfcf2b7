#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ancillary {

enum class Errc {
    InvalidArgument,
    EmptyDataset,
    AllFeaturesDegenerate,
    SchemaMismatch,
    SingleClassDataset,
    DimensionMismatch,
    TooFewSamples,
    BadArchitecture,
    NonFiniteLoss,
    SingleClassInput,
    NoPurchases,
    UndefinedMetric,
    EmptyInput,
    CalibrationDiverged,
    ParseError,
    MissingRequiredField,
    ChecksumMismatch,
    UnsupportedVersion,
    Io,
};

inline std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::AllFeaturesDegenerate: return "AllFeaturesDegenerate";
        case Errc::SchemaMismatch: return "SchemaMismatch";
        case Errc::SingleClassDataset: return "SingleClassDataset";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::BadArchitecture: return "BadArchitecture";
        case Errc::NonFiniteLoss: return "NonFiniteLoss";
        case Errc::SingleClassInput: return "SingleClassInput";
        case Errc::NoPurchases: return "NoPurchases";
        case Errc::UndefinedMetric: return "UndefinedMetric";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::CalibrationDiverged: return "CalibrationDiverged";
        case Errc::ParseError: return "ParseError";
        case Errc::MissingRequiredField: return "MissingRequiredField";
        case Errc::ChecksumMismatch: return "ChecksumMismatch";
        case Errc::UnsupportedVersion: return "UnsupportedVersion";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library. `line()` is set for errors that
/// originate in a specific line of a session log.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(format(code, what, line)), code_(code), line_(line) {}

    Errc code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    static std::string format(Errc code, const std::string& what,
                              std::optional<std::size_t> line) {
        std::string msg(errc_name(code));
        if (line) msg += " (line " + std::to_string(*line) + ")";
        msg += ": ";
        msg += what;
        return msg;
    }

    Errc code_;
    std::optional<std::size_t> line_;
};

}  // namespace ancillary
