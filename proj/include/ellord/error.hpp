#pragma once

#include <stdexcept>
#include <string>

namespace ellord {

enum class Errc {
  AsymmetricDispersion,
  AsymmetricInput,
  NotPositiveSemidefinite,
  DimensionMismatch,
  DimensionTooLarge,
  BadGeneratorParameter,
  GeneratorMismatch,
  NonPositiveParameter,
  NegativeArgument,
  RankDeficient,
  IndexOutOfRange,
  InfiniteSecondMoment,
  UnsupportedArity,
  MomentGuardTripped,
  ParseError,
  NumericFailure,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::AsymmetricDispersion: return "AsymmetricDispersion";
    case Errc::AsymmetricInput: return "AsymmetricInput";
    case Errc::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::BadGeneratorParameter: return "BadGeneratorParameter";
    case Errc::GeneratorMismatch: return "GeneratorMismatch";
    case Errc::NonPositiveParameter: return "NonPositiveParameter";
    case Errc::NegativeArgument: return "NegativeArgument";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::InfiniteSecondMoment: return "InfiniteSecondMoment";
    case Errc::UnsupportedArity: return "UnsupportedArity";
    case Errc::MomentGuardTripped: return "MomentGuardTripped";
    case Errc::ParseError: return "ParseError";
    case Errc::NumericFailure: return "NumericFailure";
  }
  return "UnknownError";
}

/// Library error with a machine-checkable code and a human message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ellord
