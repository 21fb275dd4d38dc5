#pragma once

#include <stdexcept>
#include <string>

namespace cgl {

enum class Err {
  DuplicateConcept,
  ParseError,
  UnknownConcept,
  InsufficientData,
  NoUnrelatedCandidates,
  EmptyConcept,
  NormalizationDegenerate,
  ShapeError,
  NumericalError,
  EmptyGraph,
  EmptyCorpus,
  UnknownDocument,
  InvalidThreshold,
  InvalidTopicCount,
  SingleClass,
  DegenerateTest,
  ZeroVector,
  InvalidConfig,
  IoError,
};

const char* err_name(Err e);

/// Domain error carrying a machine-readable code alongside the message.
class CglError : public std::runtime_error {
public:
  CglError(Err code, const std::string& msg);
  Err code() const { return code_; }

private:
  Err code_;
};

[[noreturn]] void raise(Err code, const std::string& msg);

}  // namespace cgl
