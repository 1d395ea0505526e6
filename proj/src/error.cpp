#include "docgraph/error.hpp"

namespace docgraph {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ZeroPageDimension: return "ZeroPageDimension";
    case ErrorCode::CoincidentCenters: return "CoincidentCenters";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::GraphCycle: return "GraphCycle";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::MissingSegmentEmbedding: return "MissingSegmentEmbedding";
    case ErrorCode::LabelSetMismatch: return "LabelSetMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::GraphDocMismatch: return "GraphDocMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IntegrityMismatch: return "IntegrityMismatch";
    case ErrorCode::InvalidDocument: return "InvalidDocument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace docgraph
