#ifndef OTF_ERRORS_HPP
#define OTF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace otf {

// Invalid user-supplied configuration or arguments (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical breakdown: non-finite values, degenerate inputs (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / parse failures (CLI exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace otf

#endif
