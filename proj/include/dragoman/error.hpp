#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dragoman {

enum class ErrorCode {
  MalformedLine,
  AlignmentMismatch,
  MissingScore,
  DuplicateId,
  NonFiniteScore,
  EmptyTrainingSet,
  EmptyText,
  InvalidArgument,
  InvalidSpec,
  UnknownPreset,
  CorpusTooSmall,
  EmptyFold,
  EmptyCorpus,
  EmptyHypotheses,
  MissingReference,
  EmptySource,
  EmptyQuery,
  PoolTooSmall,
  LineCountMismatch,
  BadModelFile,
  Io,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dragoman
