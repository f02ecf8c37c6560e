#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pocodom {

enum class ErrorCode {
  InvalidArgument,
  EmptyCloud,
  InsufficientCandidates,
  DegenerateSample,
  DegenerateNormal,
  EmptyResult,
  EmptyGrid,
  NoCorrespondences,
  SingularSystem,
  MalformedFile,
  MalformedPose,
  MalformedConfig,
  IoError,
  TooShort,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the pipeline fallback ladder, the CLI exit-code mapping) can
/// branch on the kind of failure without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pocodom
