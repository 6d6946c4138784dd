/// @file errors.hpp
/// @brief Exception types thrown on precondition violations.
///
/// Expected outcomes of a computation (no solution, irregular instance, ...)
/// are reported through result types, never through these exceptions.
#pragma once

#include <stdexcept>
#include <string>

namespace ip1s {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define IP1S_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                          \
    explicit Name(const std::string& msg) : Error(msg) {}        \
  }

IP1S_DEFINE_ERROR(NotPrime);
IP1S_DEFINE_ERROR(ReduciblePolynomial);
IP1S_DEFINE_ERROR(TowerDepthExceeded);
IP1S_DEFINE_ERROR(IncompatibleContexts);
IP1S_DEFINE_ERROR(DivisionByZero);
IP1S_DEFINE_ERROR(NonSquareElement);
IP1S_DEFINE_ERROR(ShapeMismatch);
IP1S_DEFINE_ERROR(SingularMatrix);
IP1S_DEFINE_ERROR(DegenerateForm);
IP1S_DEFINE_ERROR(ZeroEigenvalue);
IP1S_DEFINE_ERROR(FieldTooSmall);
IP1S_DEFINE_ERROR(LoopBudgetExceeded);
IP1S_DEFINE_ERROR(BlockTooLarge);
IP1S_DEFINE_ERROR(NoSquareRoot);
IP1S_DEFINE_ERROR(UnsupportedKind);
IP1S_DEFINE_ERROR(GenericityFailure);
IP1S_DEFINE_ERROR(TooLarge);
IP1S_DEFINE_ERROR(NotAPthPower);
IP1S_DEFINE_ERROR(NotAProduct);
IP1S_DEFINE_ERROR(UnluckyRestriction);
IP1S_DEFINE_ERROR(ParseError);
IP1S_DEFINE_ERROR(InternalError);

#undef IP1S_DEFINE_ERROR

}  // namespace ip1s
