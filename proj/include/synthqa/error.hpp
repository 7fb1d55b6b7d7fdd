#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synthqa {

enum class ErrorCode {
  InvalidSchema,
  MissingColumn,
  ParseError,
  EmptyFile,
  Io,
  SchemaMismatch,
  BadTuple,
  EmptyTable,
  EmptyList,
  NoRealSupport,
  EmptySynth,
  EmptyColumn,
  EmptySeries,
  UnknownColumn,
  InvalidRule,
  InvalidSearchSpace,
  InvalidStudy,
  NoCompletedTrials,
  MixedDatasets,
  ModelSetMismatch,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this type; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace synthqa
