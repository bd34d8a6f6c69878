#pragma once

#include <stdexcept>
#include <string>

namespace eddp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define EDDP_DECLARE_ERROR(Name)                                                     \
    class Name : public Error {                                                      \
    public:                                                                          \
        explicit Name(const std::string& what) : Error(std::string(#Name ": ") + what) {} \
    }

EDDP_DECLARE_ERROR(ParseError);
EDDP_DECLARE_ERROR(DimensionError);
EDDP_DECLARE_ERROR(InfeasibleRoot);
EDDP_DECLARE_ERROR(IndexError);
EDDP_DECLARE_ERROR(NumericalFailure);
EDDP_DECLARE_ERROR(StatusError);
EDDP_DECLARE_ERROR(LengthMismatch);
EDDP_DECLARE_ERROR(OutOfDomain);
EDDP_DECLARE_ERROR(EmptyCandidates);
EDDP_DECLARE_ERROR(ScheduleError);
EDDP_DECLARE_ERROR(IterationOverflow);
EDDP_DECLARE_ERROR(SubproblemInfeasible);
EDDP_DECLARE_ERROR(OracleError);
EDDP_DECLARE_ERROR(TreeTooLarge);
EDDP_DECLARE_ERROR(ConfigError);

#undef EDDP_DECLARE_ERROR

} // namespace eddp
