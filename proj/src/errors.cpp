#include "cgl/errors.hpp"

namespace cgl {

const char* err_name(Err e) {
  switch (e) {
    case Err::DuplicateConcept: return "DuplicateConcept";
    case Err::ParseError: return "ParseError";
    case Err::UnknownConcept: return "UnknownConcept";
    case Err::InsufficientData: return "InsufficientData";
    case Err::NoUnrelatedCandidates: return "NoUnrelatedCandidates";
    case Err::EmptyConcept: return "EmptyConcept";
    case Err::NormalizationDegenerate: return "NormalizationDegenerate";
    case Err::ShapeError: return "ShapeError";
    case Err::NumericalError: return "NumericalError";
    case Err::EmptyGraph: return "EmptyGraph";
    case Err::EmptyCorpus: return "EmptyCorpus";
    case Err::UnknownDocument: return "UnknownDocument";
    case Err::InvalidThreshold: return "InvalidThreshold";
    case Err::InvalidTopicCount: return "InvalidTopicCount";
    case Err::SingleClass: return "SingleClass";
    case Err::DegenerateTest: return "DegenerateTest";
    case Err::ZeroVector: return "ZeroVector";
    case Err::InvalidConfig: return "InvalidConfig";
    case Err::IoError: return "IoError";
  }
  return "Unknown";
}

CglError::CglError(Err code, const std::string& msg)
    : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

void raise(Err code, const std::string& msg) { throw CglError(code, msg); }

}  // namespace cgl
