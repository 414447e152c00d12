#pragma once

#include <stdexcept>
#include <string>

namespace arenakit {

// Base for every failure raised by the library. Each subclass names one
// failure family so callers can catch at the granularity they need.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ARENAKIT_DEFINE_ERROR(Name)         \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// observation
ARENAKIT_DEFINE_ERROR(UnknownElement);
ARENAKIT_DEFINE_ERROR(SelectorError);

// action
ARENAKIT_DEFINE_ERROR(ParseError);
ARENAKIT_DEFINE_ERROR(ExtractionError);

// backend
ARENAKIT_DEFINE_ERROR(ConfigError);
ARENAKIT_DEFINE_ERROR(ConnectionError);
ARENAKIT_DEFINE_ERROR(SessionClosed);
ARENAKIT_DEFINE_ERROR(UnsupportedAction);
ARENAKIT_DEFINE_ERROR(StaleTarget);
ARENAKIT_DEFINE_ERROR(NavigationError);
ARENAKIT_DEFINE_ERROR(UnknownProbe);
ARENAKIT_DEFINE_ERROR(TemplateError);

// evalkit
ARENAKIT_DEFINE_ERROR(LocateError);
ARENAKIT_DEFINE_ERROR(JudgeError);

// taskcfg
ARENAKIT_DEFINE_ERROR(SchemaError);
ARENAKIT_DEFINE_ERROR(DuplicateId);
ARENAKIT_DEFINE_ERROR(UnboundVariable);

// agent
ARENAKIT_DEFINE_ERROR(ModelError);

// runner
ARENAKIT_DEFINE_ERROR(MissingSnapshot);

#undef ARENAKIT_DEFINE_ERROR

}  // namespace arenakit
