#pragma once

#include <stdexcept>
#include <string>

namespace apax {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define APAX_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& what) : Error(what) {} \
    }

// Value / configuration errors.
APAX_DEFINE_ERROR(RangeError);
APAX_DEFINE_ERROR(InvalidConfig);
APAX_DEFINE_ERROR(UnsupportedValue);
APAX_DEFINE_ERROR(InvalidSpec);
APAX_DEFINE_ERROR(InternalError);

// Bitstream / container errors.
APAX_DEFINE_ERROR(CorruptStream);
APAX_DEFINE_ERROR(TruncatedStream);
APAX_DEFINE_ERROR(NotApaxFile);
APAX_DEFINE_ERROR(UnsupportedVersion);

// Analysis errors.
APAX_DEFINE_ERROR(UndefinedCorrelation);
APAX_DEFINE_ERROR(NoData);

// Dataset IO errors.
APAX_DEFINE_ERROR(SizeMismatch);
APAX_DEFINE_ERROR(UnreadableFile);
APAX_DEFINE_ERROR(NonFiniteValue);

#undef APAX_DEFINE_ERROR

}  // namespace apax
