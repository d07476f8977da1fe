#ifndef PMVIS_ERRORS_HPP
#define PMVIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pmvis {

// All recoverable failures are reported as typed exceptions rooted here.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PMVIS_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

PMVIS_DEFINE_ERROR(MalformedRle);
PMVIS_DEFINE_ERROR(DimensionMismatch);
PMVIS_DEFINE_ERROR(BoxOutOfBounds);
PMVIS_DEFINE_ERROR(SchemaError);
PMVIS_DEFINE_ERROR(DanglingReference);
PMVIS_DEFINE_ERROR(LengthMismatch);
PMVIS_DEFINE_ERROR(UncoveredCategory);
PMVIS_DEFINE_ERROR(InvalidCombination);
PMVIS_DEFINE_ERROR(NoScoredFrames);
PMVIS_DEFINE_ERROR(MissingKeyframeMask);
PMVIS_DEFINE_ERROR(VideoMismatch);
PMVIS_DEFINE_ERROR(CategoryTableMismatch);

#undef PMVIS_DEFINE_ERROR

}  // namespace pmvis

#endif  // PMVIS_ERRORS_HPP
