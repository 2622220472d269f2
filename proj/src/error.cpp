#include "dragoman/error.hpp"

namespace dragoman {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::AlignmentMismatch: return "AlignmentMismatch";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::EmptyFold: return "EmptyFold";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyHypotheses: return "EmptyHypotheses";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::EmptySource: return "EmptySource";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::LineCountMismatch: return "LineCountMismatch";
    case ErrorCode::BadModelFile: return "BadModelFile";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dragoman
