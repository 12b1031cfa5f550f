#pragma once

#include <stdexcept>
#include <string>

namespace neuroauth {

// Error kinds are grouped so the CLI can map them onto exit codes.
enum class ErrorKind {
  // configuration / argument problems
  kInvalidArgument,
  kInvalidConfig,
  // data problems
  kMissingFile,
  kIo,
  kMalformedDocument,
  kEmptyManifest,
  kDuplicateSession,
  kUnknownSession,
  kChannelCountMismatch,
  kNonFiniteValue,
  kEmptyInput,
  kSingleClass,
  // numerical / stage problems
  kUnstableFilter,
  kUnstableAutoregression,
  kEmptySelection,
  kDegenerate,
  kStageFailure,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Exit codes: 1 usage, 2 data, 3 stage failure.
int exit_code_for(ErrorKind kind);

}  // namespace neuroauth
