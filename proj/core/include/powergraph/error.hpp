#pragma once

#include <stdexcept>
#include <string>

namespace pg {

enum class Errc {
  NotPrime,
  TooLarge,
  FieldMismatch,
  DivisionByZero,
  ZeroElement,
  ZeroPolynomial,
  ParseError,
  DimensionMismatch,
  Singular,
  NotMonic,
  NotIrreducibleInput,
  OrderNotDividing,
  SamePrime,
  NoDegree2Factor,
  PrimeNotDividing,
  AdjacencyDropped,
  InvalidVertex,
  ContextMismatch,
  CentralElement,
  WrongLabel,
  PreconditionViolated,
  NotPrimePower,
  OutOfRange,
  NotPivot,
  InternalBoundViolation,
  Internal,
};

const char* errc_name(Errc e);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace pg
