#include "tfvb/error.hpp"

namespace tfvb {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
    case Errc::DuplicateCoordinate: return "DuplicateCoordinate";
    case Errc::NegativeValue: return "NegativeValue";
    case Errc::UnknownIndex: return "UnknownIndex";
    case Errc::TooLargeToMaterialize: return "TooLargeToMaterialize";
    case Errc::InvalidPrior: return "InvalidPrior";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UncoveredVisibleIndex: return "UncoveredVisibleIndex";
    case Errc::OrphanFactor: return "OrphanFactor";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteResult: return "NonFiniteResult";
    case Errc::FactorNotConnected: return "FactorNotConnected";
    case Errc::NonFiniteUpdate: return "NonFiniteUpdate";
    case Errc::DomainError: return "DomainError";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyTensor: return "EmptyTensor";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::SingleClass: return "SingleClass";
    case Errc::SupportMismatch: return "SupportMismatch";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::ConflictingDuplicate: return "ConflictingDuplicate";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tfvb
