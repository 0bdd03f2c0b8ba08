#include "edgesim/error.hpp"

namespace edgesim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::MaskConflict: return "MaskConflict";
    case ErrorCode::InactiveVertex: return "InactiveVertex";
    case ErrorCode::InactiveStart: return "InactiveStart";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::InsufficientServers: return "InsufficientServers";
    case ErrorCode::InvalidServerRate: return "InvalidServerRate";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ArchMismatch: return "ArchMismatch";
    case ErrorCode::AllServersFull: return "AllServersFull";
    case ErrorCode::EpisodeFinished: return "EpisodeFinished";
    case ErrorCode::InsufficientBuffer: return "InsufficientBuffer";
    case ErrorCode::InsufficientEpisodes: return "InsufficientEpisodes";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::TooManyEdges: return "TooManyEdges";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace edgesim
