#pragma once

#include <stdexcept>
#include <string>

namespace nlos {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define NLOS_DEFINE_ERROR(Name)          \
    class Name : public Error {          \
    public:                              \
        using Error::Error;              \
    };

NLOS_DEFINE_ERROR(InvalidWindow)
NLOS_DEFINE_ERROR(BadMagic)
NLOS_DEFINE_ERROR(BadVersion)
NLOS_DEFINE_ERROR(TruncatedRecord)
NLOS_DEFINE_ERROR(CountMismatch)
NLOS_DEFINE_ERROR(ParseError)
NLOS_DEFINE_ERROR(PoseOutOfBounds)
NLOS_DEFINE_ERROR(EmptyTrajectory)
NLOS_DEFINE_ERROR(MismatchedDims)
NLOS_DEFINE_ERROR(NonMonotonicTimestamps)
NLOS_DEFINE_ERROR(TooFewFrames)
NLOS_DEFINE_ERROR(EmptyStream)
NLOS_DEFINE_ERROR(IndexOutOfRange)
NLOS_DEFINE_ERROR(DimMismatch)
NLOS_DEFINE_ERROR(SingularKernel)
NLOS_DEFINE_ERROR(SingularSystem)
NLOS_DEFINE_ERROR(NonFiniteLoss)
NLOS_DEFINE_ERROR(NoForeground)
NLOS_DEFINE_ERROR(IoError)

#undef NLOS_DEFINE_ERROR

}  // namespace nlos
