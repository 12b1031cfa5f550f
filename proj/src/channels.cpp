#include "neuroauth/channels.hpp"

#include <set>

#include "neuroauth/error.hpp"

namespace neuroauth {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kMissingFile: return "missing file";
    case ErrorKind::kIo: return "i/o failure";
    case ErrorKind::kMalformedDocument: return "malformed document";
    case ErrorKind::kEmptyManifest: return "empty manifest";
    case ErrorKind::kDuplicateSession: return "duplicate session";
    case ErrorKind::kUnknownSession: return "unknown session";
    case ErrorKind::kChannelCountMismatch: return "channel count mismatch";
    case ErrorKind::kNonFiniteValue: return "non-finite value";
    case ErrorKind::kEmptyInput: return "empty input";
    case ErrorKind::kSingleClass: return "single class";
    case ErrorKind::kUnstableFilter: return "unstable filter";
    case ErrorKind::kUnstableAutoregression: return "unstable autoregression";
    case ErrorKind::kEmptySelection: return "empty selection";
    case ErrorKind::kDegenerate: return "degenerate input";
    case ErrorKind::kStageFailure: return "stage failure";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInvalidConfig:
      return 1;
    case ErrorKind::kMissingFile:
    case ErrorKind::kIo:
    case ErrorKind::kMalformedDocument:
    case ErrorKind::kEmptyManifest:
    case ErrorKind::kDuplicateSession:
    case ErrorKind::kUnknownSession:
    case ErrorKind::kChannelCountMismatch:
    case ErrorKind::kNonFiniteValue:
    case ErrorKind::kEmptyInput:
      return 2;
    default:
      return 3;
  }
}

ChannelSet::ChannelSet() {
  labels_.reserve(kNumChannels);
  for (auto label : kDefaultChannelLabels) labels_.emplace_back(label);
}

ChannelSet::ChannelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() != kNumChannels) {
    throw Error(ErrorKind::kChannelCountMismatch,
                "channel count mismatch: expected " + std::to_string(kNumChannels) + ", got " +
                    std::to_string(labels_.size()));
  }
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) {
    throw Error(ErrorKind::kMalformedDocument, "channel labels are not distinct");
  }
}

}  // namespace neuroauth
