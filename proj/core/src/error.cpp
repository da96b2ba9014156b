#include "powergraph/error.hpp"

namespace pg {

const char* errc_name(Errc e) {
  switch (e) {
    case Errc::NotPrime: return "NotPrime";
    case Errc::TooLarge: return "TooLarge";
    case Errc::FieldMismatch: return "FieldMismatch";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::ZeroElement: return "ZeroElement";
    case Errc::ZeroPolynomial: return "ZeroPolynomial";
    case Errc::ParseError: return "ParseError";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::Singular: return "Singular";
    case Errc::NotMonic: return "NotMonic";
    case Errc::NotIrreducibleInput: return "NotIrreducibleInput";
    case Errc::OrderNotDividing: return "OrderNotDividing";
    case Errc::SamePrime: return "SamePrime";
    case Errc::NoDegree2Factor: return "NoDegree2Factor";
    case Errc::PrimeNotDividing: return "PrimeNotDividing";
    case Errc::AdjacencyDropped: return "AdjacencyDropped";
    case Errc::InvalidVertex: return "InvalidVertex";
    case Errc::ContextMismatch: return "ContextMismatch";
    case Errc::CentralElement: return "CentralElement";
    case Errc::WrongLabel: return "WrongLabel";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::NotPrimePower: return "NotPrimePower";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NotPivot: return "NotPivot";
    case Errc::InternalBoundViolation: return "InternalBoundViolation";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace pg
