#pragma once

#include <stdexcept>
#include <string>

namespace wdeconv {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define WDECONV_DECLARE_ERROR(Name)                                            \
  class Name : public Error                                                    \
  {                                                                            \
  public:                                                                      \
    explicit Name(const std::string& what)                                     \
      : Error(std::string(#Name ": ") + what)                                  \
    {}                                                                         \
  }

WDECONV_DECLARE_ERROR(DomainError);
WDECONV_DECLARE_ERROR(Unsupported);
WDECONV_DECLARE_ERROR(DimensionError);
WDECONV_DECLARE_ERROR(GridMismatch);
WDECONV_DECLARE_ERROR(NotUnitVector);
WDECONV_DECLARE_ERROR(TooLarge);
WDECONV_DECLARE_ERROR(GridTooNarrow);
WDECONV_DECLARE_ERROR(SpectralDivergence);
WDECONV_DECLARE_ERROR(ImagTooLarge);
WDECONV_DECLARE_ERROR(BandTooWide);
WDECONV_DECLARE_ERROR(EmptyChain);
WDECONV_DECLARE_ERROR(NumericalUnderflow);
WDECONV_DECLARE_ERROR(PreconditionViolated);
WDECONV_DECLARE_ERROR(SupportMismatch);
WDECONV_DECLARE_ERROR(TooFewPoints);
WDECONV_DECLARE_ERROR(ConfigError);
WDECONV_DECLARE_ERROR(IoError);

#undef WDECONV_DECLARE_ERROR

} // namespace wdeconv
