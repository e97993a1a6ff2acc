#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nonwoven {

// Base of every error raised by the library. `name()` is the stable
// identifier printed by the CLI on the diagnostic stream.
class Error : public std::runtime_error {
public:
  Error(std::string_view name, const std::string& what)
      : std::runtime_error(what), name_(name) {}

  std::string_view name() const noexcept { return name_; }

private:
  std::string_view name_;
};

#define NONWOVEN_DEFINE_ERROR(Type)                                          \
  class Type : public Error {                                                \
  public:                                                                    \
    explicit Type(const std::string& what) : Error(#Type, what) {}           \
  }

NONWOVEN_DEFINE_ERROR(ParseError);
NONWOVEN_DEFINE_ERROR(UnsupportedFormat);
NONWOVEN_DEFINE_ERROR(InvalidParameter);
NONWOVEN_DEFINE_ERROR(NotBimodal);
NONWOVEN_DEFINE_ERROR(PlacementFailure);
NONWOVEN_DEFINE_ERROR(MissingCalibration);
NONWOVEN_DEFINE_ERROR(DegenerateFit);
NONWOVEN_DEFINE_ERROR(NoSignal);
NONWOVEN_DEFINE_ERROR(IncompleteCalibration);
NONWOVEN_DEFINE_ERROR(NonMonotoneCalibration);
NONWOVEN_DEFINE_ERROR(IncompleteDataset);
NONWOVEN_DEFINE_ERROR(DivergenceError);
NONWOVEN_DEFINE_ERROR(EmptyForeground);
NONWOVEN_DEFINE_ERROR(EmptyDistribution);
NONWOVEN_DEFINE_ERROR(IoError);

#undef NONWOVEN_DEFINE_ERROR

}  // namespace nonwoven
