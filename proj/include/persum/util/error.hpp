#pragma once

#include <stdexcept>
#include <string>

namespace persum {

/// Base for every error the toolkit raises. `kind()` is a stable tag used in
/// structured CLI error output.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

#define PERSUM_DEFINE_ERROR(Name, tag)                                                             \
    class Name : public Error {                                                                    \
      public:                                                                                      \
        using Error::Error;                                                                        \
        const char* kind() const noexcept override { return tag; }                                 \
    }

PERSUM_DEFINE_ERROR(ParseError, "parse");
PERSUM_DEFINE_ERROR(IntegrityError, "integrity");
PERSUM_DEFINE_ERROR(ConfigError, "config");
PERSUM_DEFINE_ERROR(TransportError, "transport");
PERSUM_DEFINE_ERROR(ProtocolError, "protocol");
PERSUM_DEFINE_ERROR(RenderError, "render");
PERSUM_DEFINE_ERROR(ScoringError, "scoring");
PERSUM_DEFINE_ERROR(DegenerateCompositionError, "degenerate_composition");
PERSUM_DEFINE_ERROR(SizeError, "size");
PERSUM_DEFINE_ERROR(UndefinedMetricError, "undefined_metric");
PERSUM_DEFINE_ERROR(ParameterError, "parameter");
PERSUM_DEFINE_ERROR(FitError, "fit");
PERSUM_DEFINE_ERROR(RerankError, "rerank");

#undef PERSUM_DEFINE_ERROR

} // namespace persum
