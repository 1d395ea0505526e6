#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace docgraph {

enum class ErrorCode {
  MalformedJson,
  MissingField,
  EmptyDocument,
  MalformedLine,
  DuplicateId,
  ZeroPageDimension,
  CoincidentCenters,
  BadHeader,
  DimensionMismatch,
  MissingKey,
  EmptyBatch,
  GraphCycle,
  EmptyCorpus,
  NonFiniteLoss,
  MissingSegmentEmbedding,
  LabelSetMismatch,
  LengthMismatch,
  EmptyHistory,
  GraphDocMismatch,
  InvalidConfig,
  IntegrityMismatch,
  InvalidDocument,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Every failure the library reports carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace docgraph
