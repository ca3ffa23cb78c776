#pragma once

#include <stdexcept>
#include <string>

namespace sds {

/// Error categories surfaced by the library. Each maps to one failure mode
/// of a public operation; the CLI translates categories into exit codes.
enum class Errc {
    InsufficientData,
    NoTrackableKeypoints,
    InvalidInput,
    SpanExceedsVideo,
    NotPerfectSquare,
    DimensionMismatch,
    CoordinateOutOfRange,
    ParseError,
    UnknownFunction,
    NumericError,
    ParamInfeasible,
    DegenerateGeometry,
    NoCommonKeypoints,
    InvalidWindow,
    ScoreParseError,
    ScoreOutOfRange,
    AuthError,
    TransportError,
    ProtocolError,
    MissingAttachment,
    SusChainError,
    IterationFailed,
    PipelineFailed,
    IoError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::NoTrackableKeypoints: return "NoTrackableKeypoints";
        case Errc::InvalidInput: return "InvalidInput";
        case Errc::SpanExceedsVideo: return "SpanExceedsVideo";
        case Errc::NotPerfectSquare: return "NotPerfectSquare";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::CoordinateOutOfRange: return "CoordinateOutOfRange";
        case Errc::ParseError: return "ParseError";
        case Errc::UnknownFunction: return "UnknownFunction";
        case Errc::NumericError: return "NumericError";
        case Errc::ParamInfeasible: return "ParamInfeasible";
        case Errc::DegenerateGeometry: return "DegenerateGeometry";
        case Errc::NoCommonKeypoints: return "NoCommonKeypoints";
        case Errc::InvalidWindow: return "InvalidWindow";
        case Errc::ScoreParseError: return "ScoreParseError";
        case Errc::ScoreOutOfRange: return "ScoreOutOfRange";
        case Errc::AuthError: return "AuthError";
        case Errc::TransportError: return "TransportError";
        case Errc::ProtocolError: return "ProtocolError";
        case Errc::MissingAttachment: return "MissingAttachment";
        case Errc::SusChainError: return "SusChainError";
        case Errc::IterationFailed: return "IterationFailed";
        case Errc::PipelineFailed: return "PipelineFailed";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool cond, Errc code, const std::string& message) {
    if (!cond) fail(code, message);
}

}  // namespace sds
