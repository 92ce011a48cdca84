#pragma once

#include <stdexcept>
#include <string>

namespace mrccs {

// Process exit codes; the CLI maps the exception types below onto these.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  data = 2,
  config = 3,
  numeric = 4,
};

// Bad shapes, bad plans, unknown keys, misuse of the API.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or inconsistent external data (files, datasets, checkpoints).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mrccs
