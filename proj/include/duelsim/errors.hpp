#pragma once

#include <stdexcept>
#include <string>

namespace duelsim {

// Base for every error raised by the library. Each subclass corresponds to
// one failure category so callers (and tests) can catch precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DUELSIM_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

DUELSIM_DEFINE_ERROR(ShapeError);
DUELSIM_DEFINE_ERROR(RangeError);
DUELSIM_DEFINE_ERROR(ComplementViolation);
DUELSIM_DEFINE_ERROR(IndexError);
DUELSIM_DEFINE_ERROR(DomainError);
DUELSIM_DEFINE_ERROR(AttemptsExhausted);
DUELSIM_DEFINE_ERROR(InvalidWinner);
DUELSIM_DEFINE_ERROR(EmptyInput);
DUELSIM_DEFINE_ERROR(ConfigMismatch);
DUELSIM_DEFINE_ERROR(ParseError);
DUELSIM_DEFINE_ERROR(SizeMismatch);
DUELSIM_DEFINE_ERROR(ModeMismatch);

#undef DUELSIM_DEFINE_ERROR

// Configuration problems carry the name of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace duelsim
