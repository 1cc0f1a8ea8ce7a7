#pragma once

#include <stdexcept>
#include <string>

namespace ndscope {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NDSCOPE_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

NDSCOPE_DEFINE_ERROR(ParseError);
NDSCOPE_DEFINE_ERROR(SchemaError);
NDSCOPE_DEFINE_ERROR(DimensionError);
NDSCOPE_DEFINE_ERROR(ShapeError);
NDSCOPE_DEFINE_ERROR(IndexError);
NDSCOPE_DEFINE_ERROR(NotUnimodular);
NDSCOPE_DEFINE_ERROR(SingularMatrix);
NDSCOPE_DEFINE_ERROR(NotRegular);
NDSCOPE_DEFINE_ERROR(NotWellPosed);
NDSCOPE_DEFINE_ERROR(WrongCase);
NDSCOPE_DEFINE_ERROR(RegionIsTrivial);
NDSCOPE_DEFINE_ERROR(ZeroDiagonal);
NDSCOPE_DEFINE_ERROR(NotReconstructible);
NDSCOPE_DEFINE_ERROR(Inconsistent);
NDSCOPE_DEFINE_ERROR(SingularRecovery);
NDSCOPE_DEFINE_ERROR(SingularE);
NDSCOPE_DEFINE_ERROR(Unstable);
NDSCOPE_DEFINE_ERROR(ZeroSpectrum);
NDSCOPE_DEFINE_ERROR(NoConvergence);

#undef NDSCOPE_DEFINE_ERROR

}  // namespace ndscope
