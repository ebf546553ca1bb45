#pragma once

#include <stdexcept>
#include <string>

namespace sat {

// Error taxonomy used across the library:
//   ConfigError   -- caller supplied inconsistent shapes, ranges, or settings
//   DataError     -- external input (corpus, checkpoint, targets) is invalid
//   InternalError -- broken invariant inside the library (a bug)
//   TrainAbort    -- training stopped mid-run (e.g. non-finite loss)
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sat

// Lazy checks: the message expression is evaluated only on failure, so
// concatenations never run on the hot path.
#define SAT_REQUIRE(cond, ...)                        \
  do {                                                \
    if (!(cond)) throw ::sat::ConfigError(__VA_ARGS__); \
  } while (0)

#define SAT_REQUIRE_DATA(cond, ...)                 \
  do {                                              \
    if (!(cond)) throw ::sat::DataError(__VA_ARGS__); \
  } while (0)

#define SAT_CHECK_INTERNAL(cond, ...)                   \
  do {                                                  \
    if (!(cond)) throw ::sat::InternalError(__VA_ARGS__); \
  } while (0)
