#pragma once

#include <stdexcept>
#include <string>

namespace emips {

// Base of every exception thrown by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emips
