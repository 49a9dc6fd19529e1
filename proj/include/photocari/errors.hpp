#ifndef PHOTOCARI_ERRORS_HPP
#define PHOTOCARI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace photocari {

// Base of every error raised by the library. The CLI prints what() as its
// one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PHOTOCARI_DEFINE_ERROR(Name)          \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

PHOTOCARI_DEFINE_ERROR(MissingDomainDir);
PHOTOCARI_DEFINE_ERROR(BadSize);
PHOTOCARI_DEFINE_ERROR(ShapeMismatch);
PHOTOCARI_DEFINE_ERROR(ChannelMismatch);
PHOTOCARI_DEFINE_ERROR(DegenerateConfiguration);
PHOTOCARI_DEFINE_ERROR(ExtractorUnavailable);
PHOTOCARI_DEFINE_ERROR(NonFiniteLoss);
PHOTOCARI_DEFINE_ERROR(StageMismatch);
PHOTOCARI_DEFINE_ERROR(IoError);
PHOTOCARI_DEFINE_ERROR(ConfigError);

#undef PHOTOCARI_DEFINE_ERROR

}  // namespace photocari

#endif  // PHOTOCARI_ERRORS_HPP
