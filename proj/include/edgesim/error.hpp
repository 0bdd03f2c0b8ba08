#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgesim {

enum class ErrorCode {
  IndexOutOfRange,
  SelfLoop,
  MaskConflict,
  InactiveVertex,
  InactiveStart,
  EmptyGraph,
  InsufficientServers,
  InvalidServerRate,
  ConstraintViolation,
  ShapeMismatch,
  ArchMismatch,
  AllServersFull,
  EpisodeFinished,
  InsufficientBuffer,
  InsufficientEpisodes,
  ParseError,
  CountMismatch,
  SampleTooLarge,
  TooManyEdges,
  ConfigError,
  MissingCheckpoint,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edgesim
