#include "synthqa/error.hpp"

namespace synthqa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::BadTuple: return "BadTuple";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::NoRealSupport: return "NoRealSupport";
    case ErrorCode::EmptySynth: return "EmptySynth";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::InvalidRule: return "InvalidRule";
    case ErrorCode::InvalidSearchSpace: return "InvalidSearchSpace";
    case ErrorCode::InvalidStudy: return "InvalidStudy";
    case ErrorCode::NoCompletedTrials: return "NoCompletedTrials";
    case ErrorCode::MixedDatasets: return "MixedDatasets";
    case ErrorCode::ModelSetMismatch: return "ModelSetMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace synthqa
