#pragma once

#include <stdexcept>
#include <string>

namespace spoofbench {

// Root of every exception thrown by the library. Each module derives its
// own named errors from this so callers can catch per category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spoofbench
